#pragma once

// Brute-force PSNR and SSIM in long double / double, written from the
// definitions without sharing code with the library.

#include <cmath>

#include "drd/core/rng.hpp"
#include "drd/image/image.hpp"

namespace drd::testing::quality {

inline Image random_image(Rng& rng, std::int64_t h, std::int64_t w, double lo = 0.0, double hi = 1.0) {
  Image img = Image::zeros(h, w);
  for (float& v : img.data) v = static_cast<float>(rng.uniform(lo, hi));
  return img;
}

inline double psnr_oracle(const Image& a, const Image& b) {
  long double se = 0.0L;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const long double x = std::fmin(1.0, std::fmax(0.0, a.data[i]));
    const long double y = std::fmin(1.0, std::fmax(0.0, b.data[i]));
    se += (x - y) * (x - y);
  }
  const long double mse = se / a.data.size();
  return static_cast<double>(-10.0L * std::log10(mse));
}

// Per-window two-pass statistics with the window rebuilt at every position.
inline double ssim_oracle(const Image& a, const Image& b) {
  auto y = [](const Image& im, std::int64_t r, std::int64_t c) {
    auto cl = [](float v) { return std::fmin(1.0, std::fmax(0.0, static_cast<double>(v))); };
    return 0.299 * cl(im.at(0, r, c)) + 0.587 * cl(im.at(1, r, c)) + 0.114 * cl(im.at(2, r, c));
  };
  double total = 0.0;
  std::int64_t count = 0;
  for (std::int64_t r0 = 0; r0 + 11 <= a.height; ++r0)
    for (std::int64_t c0 = 0; c0 + 11 <= a.width; ++c0) {
      double wsum = 0.0, mx = 0.0, my = 0.0;
      for (int i = -5; i <= 5; ++i)
        for (int j = -5; j <= 5; ++j) {
          const double w = std::exp(-(i * i + j * j) / 4.5);
          wsum += w;
          mx += w * y(a, r0 + 5 + i, c0 + 5 + j);
          my += w * y(b, r0 + 5 + i, c0 + 5 + j);
        }
      mx /= wsum;
      my /= wsum;
      double vx = 0.0, vy = 0.0, cxy = 0.0;
      for (int i = -5; i <= 5; ++i)
        for (int j = -5; j <= 5; ++j) {
          const double w = std::exp(-(i * i + j * j) / 4.5) / wsum;
          const double dx = y(a, r0 + 5 + i, c0 + 5 + j) - mx, dy = y(b, r0 + 5 + i, c0 + 5 + j) - my;
          vx += w * dx * dx;
          vy += w * dy * dy;
          cxy += w * dx * dy;
        }
      const double c1 = 1e-4, c2 = 9e-4;
      total += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / static_cast<double>(count);
}

}  // namespace drd::testing::quality
