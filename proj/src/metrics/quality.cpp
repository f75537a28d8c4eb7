#include "drd/metrics/quality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "drd/core/error.hpp"

namespace drd::metrics {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void require_same(const Image& a, const Image& b, const char* what) {
  if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
    throw DimensionError(std::string(what) + ": image extents differ");
  }
}

std::vector<double> luma(const Image& img) {
  std::vector<double> y(static_cast<std::size_t>(img.plane()));
  auto clamp01 = [](float v) { return std::clamp(static_cast<double>(v), 0.0, 1.0); };
  for (std::int64_t i = 0; i < img.plane(); ++i) {
    if (img.channels == 3) {
      y[static_cast<std::size_t>(i)] = 0.299 * clamp01(img.data[static_cast<std::size_t>(i)]) +
                                       0.587 * clamp01(img.data[static_cast<std::size_t>(img.plane() + i)]) +
                                       0.114 * clamp01(img.data[static_cast<std::size_t>(2 * img.plane() + i)]);
    } else {
      y[static_cast<std::size_t>(i)] = clamp01(img.data[static_cast<std::size_t>(i)]);
    }
  }
  return y;
}

std::array<double, kWindow * kWindow> gaussian_window() {
  std::array<double, kWindow * kWindow> w{};
  double total = 0.0;
  for (int y = 0; y < kWindow; ++y)
    for (int x = 0; x < kWindow; ++x) {
      const double dy = y - kWindow / 2, dx = x - kWindow / 2;
      w[static_cast<std::size_t>(y * kWindow + x)] = std::exp(-(dx * dx + dy * dy) / (2 * kSigma * kSigma));
      total += w[static_cast<std::size_t>(y * kWindow + x)];
    }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

double psnr(const Image& a, const Image& b, double max_val) {
  require_same(a, b, "psnr");
  if (!(max_val > 0.0)) throw ConfigError("psnr: max_val must be > 0");
  double se = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = std::clamp(static_cast<double>(a.data[i]), 0.0, max_val) -
                     std::clamp(static_cast<double>(b.data[i]), 0.0, max_val);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.data.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(max_val * max_val / mse));
}

double ssim(const Image& a, const Image& b) {
  require_same(a, b, "ssim");
  if (a.height < kWindow || a.width < kWindow) {
    throw ConfigError("ssim: image " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                      " smaller than the 11x11 window");
  }
  static const auto window = gaussian_window();
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const auto ya = luma(a), yb = luma(b);
  const std::int64_t oh = a.height - kWindow + 1, ow = a.width - kWindow + 1;
  double total = 0.0;
  for (std::int64_t oy = 0; oy < oh; ++oy) {
    for (std::int64_t ox = 0; ox < ow; ++ox) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int wy = 0; wy < kWindow; ++wy)
        for (int wx = 0; wx < kWindow; ++wx) {
          const double w = window[static_cast<std::size_t>(wy * kWindow + wx)];
          const auto idx = static_cast<std::size_t>((oy + wy) * a.width + ox + wx);
          const double pa = ya[idx], pb = yb[idx];
          ma += w * pa;
          mb += w * pb;
          saa += w * (pa * pa);
          sbb += w * (pb * pb);
          sab += w * (pa * pb);
        }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  }
  return total / static_cast<double>(oh * ow);
}

MetricReport evaluate(const std::vector<Image>& predictions, const std::vector<Image>& references) {
  if (predictions.size() != references.size()) {
    throw UsageError("evaluate: " + std::to_string(predictions.size()) + " predictions vs " +
                     std::to_string(references.size()) + " references");
  }
  MetricReport r;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    r.psnr.push_back(psnr(predictions[i], references[i]));
    r.ssim.push_back(ssim(predictions[i], references[i]));
  }
  if (!r.psnr.empty()) {
    const double n = static_cast<double>(r.psnr.size());
    r.mean_psnr = std::accumulate(r.psnr.begin(), r.psnr.end(), 0.0) / n;
    r.mean_ssim = std::accumulate(r.ssim.begin(), r.ssim.end(), 0.0) / n;
  }
  return r;
}

}  // namespace drd::metrics
