#include <png.h>

#include <string>

#include "drd/core/error.hpp"
#include "drd/image/image.hpp"

namespace drd {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw IoError(path.string() + ": " + what);
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) fail(path, png.message);
  // The header format mirrors the file: anything but plain 8-bit RGB has a
  // color-map, alpha or linear (16-bit) flag, or lacks the color flag.
  if (png.format != PNG_FORMAT_RGB) {
    const auto format = png.format;
    png_image_free(&png);
    fail(path, "expected 8-bit RGB, got PNG format flags " + std::to_string(format));
  }
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) fail(path, png.message);

  Image img = Image::zeros(png.height, png.width, 3);
  for (std::int64_t y = 0; y < img.height; ++y)
    for (std::int64_t x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) = pixels[static_cast<std::size_t>((y * img.width + x) * 3 + c)] / 255.0f;
  return img;
}

void save_image(const Image& img, const std::filesystem::path& path) {
  if (img.channels != 3) throw DimensionError("save_image: expected 3 channels, got " + std::to_string(img.channels));
  if (img.height < 1 || img.width < 1) throw DimensionError("save_image: empty image");
  std::vector<png_byte> pixels(static_cast<std::size_t>(img.width * img.height * 3));
  for (std::int64_t y = 0; y < img.height; ++y)
    for (std::int64_t x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) pixels[static_cast<std::size_t>((y * img.width + x) * 3 + c)] = quantize(img.at(c, y, x));

  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, pixels.data(), 0, nullptr)) fail(path, png.message);
}

}  // namespace drd
