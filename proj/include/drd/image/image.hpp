#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "drd/tensor/tensor.hpp"

namespace drd {

/// Channels-first image with values nominally in [0, 1].
struct Image {
  std::int64_t channels = 3;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<float> data;

  static Image zeros(std::int64_t height, std::int64_t width, std::int64_t channels = 3);

  std::int64_t plane() const { return height * width; }
  float& at(std::int64_t c, std::int64_t y, std::int64_t x) {
    return data[static_cast<std::size_t>((c * height + y) * width + x)];
  }
  float at(std::int64_t c, std::int64_t y, std::int64_t x) const {
    return data[static_cast<std::size_t>((c * height + y) * width + x)];
  }

  void clamp();
  bool operator==(const Image&) const = default;
};

Tensor to_tensor(const Image& img);
/// Stacks same-sized images into (N, C, H, W).
Tensor stack(std::span<const Image> images);
/// Sample `n` of a batch, unclamped.
Image from_tensor(const Tensor& t, std::int64_t n = 0);

Image crop(const Image& img, std::int64_t y, std::int64_t x, std::int64_t height, std::int64_t width);

/// 8-bit RGB PNG. Values are byte / 255.
Image load_image(const std::filesystem::path& path);
/// Clamps to [0, 1] and rounds to the nearest byte. The encoder settings are
/// fixed, so equal images give byte-identical files.
void save_image(const Image& img, const std::filesystem::path& path);

/// value -> round(clamp(value) * 255)
std::uint8_t quantize(float value);

}  // namespace drd
