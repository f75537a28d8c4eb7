#pragma once

#include <vector>

#include "drd/image/image.hpp"

namespace drd::metrics {

constexpr double kPsnrCap = 99.0;

/// 10 log10(max^2 / MSE) over all channels and pixels after clamping both
/// inputs to [0, max_val]; capped at 99 dB (identical images give the cap).
double psnr(const Image& a, const Image& b, double max_val = 1.0);

/// Mean single-scale SSIM on Rec.601 luma, 11x11 Gaussian window (sigma 1.5)
/// over valid positions, K1 = 0.01, K2 = 0.03, dynamic range 1.
double ssim(const Image& a, const Image& b);

struct MetricReport {
  std::vector<double> psnr;
  std::vector<double> ssim;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

/// Per-pair PSNR/SSIM plus means.
MetricReport evaluate(const std::vector<Image>& predictions, const std::vector<Image>& references);

}  // namespace drd::metrics
