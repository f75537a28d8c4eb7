#include "drd/image/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drd/core/error.hpp"

namespace drd {

Image Image::zeros(std::int64_t height, std::int64_t width, std::int64_t channels) {
  if (height < 0 || width < 0 || channels < 1) throw DimensionError("invalid image extent");
  Image img;
  img.channels = channels;
  img.height = height;
  img.width = width;
  img.data.assign(static_cast<std::size_t>(channels * height * width), 0.0f);
  return img;
}

void Image::clamp() {
  for (float& v : data) v = std::clamp(v, 0.0f, 1.0f);
}

Tensor to_tensor(const Image& img) {
  return Tensor::from_data({1, img.channels, img.height, img.width}, img.data);
}

Tensor stack(std::span<const Image> images) {
  if (images.empty()) throw DimensionError("stack of zero images");
  const Image& first = images.front();
  std::vector<float> data;
  data.reserve(images.size() * first.data.size());
  for (const Image& img : images) {
    if (img.channels != first.channels || img.height != first.height || img.width != first.width) {
      throw DimensionError("stack: image extents differ");
    }
    data.insert(data.end(), img.data.begin(), img.data.end());
  }
  return Tensor::from_data({static_cast<std::int64_t>(images.size()), first.channels, first.height, first.width},
                           std::move(data));
}

Image from_tensor(const Tensor& t, std::int64_t n) {
  const Shape& s = t.shape();
  if (n < 0 || n >= s.n) throw DimensionError("from_tensor: sample " + std::to_string(n) + " out of range");
  Image img = Image::zeros(s.h, s.w, s.c);
  auto src = t.data().subspan(static_cast<std::size_t>(n * s.c * s.plane()), img.data.size());
  std::copy(src.begin(), src.end(), img.data.begin());
  return img;
}

Image crop(const Image& img, std::int64_t y, std::int64_t x, std::int64_t height, std::int64_t width) {
  if (y < 0 || x < 0 || height < 0 || width < 0 || y + height > img.height || x + width > img.width) {
    throw DimensionError("crop window outside the image");
  }
  Image out = Image::zeros(height, width, img.channels);
  for (std::int64_t c = 0; c < img.channels; ++c)
    for (std::int64_t r = 0; r < height; ++r)
      std::copy_n(&img.data[static_cast<std::size_t>((c * img.height + y + r) * img.width + x)], width,
                  &out.at(c, r, 0));
  return out;
}

std::uint8_t quantize(float value) {
  const float v = std::clamp(value, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(static_cast<double>(v) * 255.0));
}

}  // namespace drd
