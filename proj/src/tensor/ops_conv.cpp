#include <algorithm>
#include <string>

#include "drd/core/error.hpp"
#include "drd/core/parallel.hpp"
#include "drd/tensor/ops.hpp"
#include "gemm.hpp"

namespace drd::ops {

namespace {

struct ConvGeometry {
  std::int64_t n, cin, h, w;
  std::int64_t cout, k;
  std::int64_t oh, ow;
  int stride, dilation, padding;

  std::int64_t rows() const { return cin * k * k; }
  std::int64_t out_plane() const { return oh * ow; }
  bool direct() const { return k == 1 && stride == 1 && padding == 0; }
};

// Valid output-column range [lo, hi) for kernel column offset `off`.
inline void valid_range(std::int64_t off, std::int64_t in, std::int64_t out, int stride,
                        std::int64_t& lo, std::int64_t& hi) {
  // ix = o * stride + off must satisfy 0 <= ix < in.
  lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
  const std::int64_t last = in - 1 - off;
  hi = last < 0 ? 0 : std::min(out, last / stride + 1);
  if (hi < lo) hi = lo;
}

// col[row][oy * ow + ox] for one sample.
void im2col(const ConvGeometry& g, const float* x, float* col) {
  const std::int64_t plane = g.out_plane();
  for (std::int64_t ci = 0; ci < g.cin; ++ci) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        float* dst = col + ((ci * g.k + ky) * g.k + kx) * plane;
        const std::int64_t offy = ky * g.dilation - g.padding;
        const std::int64_t offx = kx * g.dilation - g.padding;
        std::int64_t xlo, xhi;
        valid_range(offx, g.w, g.ow, g.stride, xlo, xhi);
        for (std::int64_t oy = 0; oy < g.oh; ++oy) {
          float* d = dst + oy * g.ow;
          const std::int64_t iy = oy * g.stride + offy;
          if (iy < 0 || iy >= g.h) {
            std::fill(d, d + g.ow, 0.0f);
            continue;
          }
          const float* src = x + (ci * g.h + iy) * g.w;
          std::fill(d, d + xlo, 0.0f);
          for (std::int64_t ox = xlo; ox < xhi; ++ox) d[ox] = src[ox * g.stride + offx];
          std::fill(d + xhi, d + g.ow, 0.0f);
        }
      }
    }
  }
}

// dx += scatter(dcol).
void col2im(const ConvGeometry& g, const float* dcol, float* dx) {
  const std::int64_t plane = g.out_plane();
  for (std::int64_t ci = 0; ci < g.cin; ++ci) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        const float* src = dcol + ((ci * g.k + ky) * g.k + kx) * plane;
        const std::int64_t offy = ky * g.dilation - g.padding;
        const std::int64_t offx = kx * g.dilation - g.padding;
        std::int64_t xlo, xhi;
        valid_range(offx, g.w, g.ow, g.stride, xlo, xhi);
        for (std::int64_t oy = 0; oy < g.oh; ++oy) {
          const std::int64_t iy = oy * g.stride + offy;
          if (iy < 0 || iy >= g.h) continue;
          float* dst = dx + (ci * g.h + iy) * g.w;
          const float* s = src + oy * g.ow;
          for (std::int64_t ox = xlo; ox < xhi; ++ox) dst[ox * g.stride + offx] += s[ox];
        }
      }
    }
  }
}

}  // namespace

std::int64_t conv_output_size(std::int64_t in, int kernel, int stride, int dilation, int padding) {
  const std::int64_t span = in + 2 * static_cast<std::int64_t>(padding) -
                            static_cast<std::int64_t>(dilation) * (kernel - 1) - 1;
  if (span < 0) return 0;
  return span / stride + 1;
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, Conv2dOptions opt) {
  const Shape& is = input.shape();
  const Shape& ws = weight.shape();
  if (opt.stride < 1) throw ConfigError("conv2d: stride must be >= 1, got " + std::to_string(opt.stride));
  if (opt.dilation < 1) {
    throw ConfigError("conv2d: dilation must be >= 1, got " + std::to_string(opt.dilation));
  }
  if (opt.padding < 0) throw ConfigError("conv2d: padding must be >= 0");
  if (ws.h != ws.w) {
    throw DimensionError("conv2d: kernel must be square, weight axes 2/3 are " + std::to_string(ws.h) +
                         "x" + std::to_string(ws.w));
  }
  if (is.c != ws.c) {
    throw DimensionError("conv2d: input channels (axis 1) = " + std::to_string(is.c) +
                         " but weight expects C_in = " + std::to_string(ws.c));
  }
  if (bias.defined() && bias.shape() != Shape{1, ws.n, 1, 1}) {
    throw DimensionError("conv2d: bias shape " + bias.shape().str() + " does not match C_out (axis 1) = " +
                         std::to_string(ws.n));
  }
  ConvGeometry g{is.n, is.c, is.h, is.w, ws.n, ws.h, 0, 0, opt.stride, opt.dilation, opt.padding};
  g.oh = conv_output_size(is.h, static_cast<int>(g.k), opt.stride, opt.dilation, opt.padding);
  g.ow = conv_output_size(is.w, static_cast<int>(g.k), opt.stride, opt.dilation, opt.padding);
  if (g.oh <= 0 || g.ow <= 0) {
    throw ConfigError("conv2d: non-positive output size " + std::to_string(g.oh) + "x" +
                      std::to_string(g.ow) + " for input " + is.str());
  }

  Tensor out = Tensor::zeros({g.n, g.cout, g.oh, g.ow});
  const std::int64_t plane = g.out_plane();
  const std::int64_t rows = g.rows();
  const float* x = input.data().data();
  const float* wp = weight.data().data();
  float* y = out.data().data();

  parallel_for(static_cast<std::size_t>(g.n), [&](std::size_t ni) {
    const auto n = static_cast<std::int64_t>(ni);
    float* yn = y + n * g.cout * plane;
    if (bias.defined()) {
      const float* bp = bias.data().data();
      for (std::int64_t co = 0; co < g.cout; ++co) std::fill(yn + co * plane, yn + (co + 1) * plane, bp[co]);
    }
    const float* xn = x + n * g.cin * g.h * g.w;
    if (g.direct()) {
      detail::gemm_nn(g.cout, plane, rows, wp, rows, xn, plane, yn, plane);
    } else {
      std::vector<float> col(static_cast<std::size_t>(rows * plane));
      im2col(g, xn, col.data());
      detail::gemm_nn(g.cout, plane, rows, wp, rows, col.data(), plane, yn, plane);
    }
  });

  if (should_record({&input, &weight, &bias})) {
    record(out, "conv2d", {input, weight, bias}, [input, weight, bias, g](const TensorImpl& o) mutable {
      const std::int64_t plane = g.out_plane();
      const std::int64_t rows = g.rows();
      const float* dy = o.grad.data();
      const float* x = input.data().data();
      const float* wp = weight.data().data();

      if (bias.defined() && bias.requires_grad()) {
        auto db = bias.grad_buffer();
        for (std::int64_t co = 0; co < g.cout; ++co) {
          double s = 0.0;
          for (std::int64_t n = 0; n < g.n; ++n) {
            const float* d = dy + (n * g.cout + co) * plane;
            for (std::int64_t j = 0; j < plane; ++j) s += d[j];
          }
          db[co] += static_cast<float>(s);
        }
      }

      const bool need_w = weight.requires_grad();
      const bool need_x = input.requires_grad();
      std::vector<std::vector<float>> dw_parts(need_w ? static_cast<std::size_t>(g.n) : 0);
      float* dx = need_x ? input.grad_buffer().data() : nullptr;

      parallel_for(static_cast<std::size_t>(g.n), [&](std::size_t ni) {
        const auto n = static_cast<std::int64_t>(ni);
        const float* dyn = dy + n * g.cout * plane;
        const float* xn = x + n * g.cin * g.h * g.w;
        if (need_w) {
          auto& part = dw_parts[ni];
          part.assign(static_cast<std::size_t>(g.cout * rows), 0.0f);
          if (g.direct()) {
            detail::gemm_nt(g.cout, rows, plane, dyn, plane, xn, plane, part.data(), rows);
          } else {
            std::vector<float> col(static_cast<std::size_t>(rows * plane));
            im2col(g, xn, col.data());
            detail::gemm_nt(g.cout, rows, plane, dyn, plane, col.data(), plane, part.data(), rows);
          }
        }
        if (need_x) {
          float* dxn = dx + n * g.cin * g.h * g.w;
          if (g.direct()) {
            detail::gemm_tn(rows, plane, g.cout, wp, rows, dyn, plane, dxn, plane);
          } else {
            std::vector<float> dcol(static_cast<std::size_t>(rows * plane), 0.0f);
            detail::gemm_tn(rows, plane, g.cout, wp, rows, dyn, plane, dcol.data(), plane);
            col2im(g, dcol.data(), dxn);
          }
        }
      });

      if (need_w) {
        auto dw = weight.grad_buffer();
        for (const auto& part : dw_parts)
          for (std::size_t i = 0; i < part.size(); ++i) dw[i] += part[i];
      }
    });
  }
  return out;
}

}  // namespace drd::ops
