#include <algorithm>
#include <cmath>
#include <string>

#include "drd/core/error.hpp"
#include "drd/tensor/ops.hpp"

namespace drd::ops {

namespace {

struct Broadcast {
  Shape out;
  // Element strides per axis; 0 on broadcast axes.
  std::int64_t sa[4];
  std::int64_t sb[4];
  bool same;
};

void strides_for(const Shape& s, const Shape& out, std::int64_t* st) {
  const std::int64_t full[4] = {s.c * s.h * s.w, s.h * s.w, s.w, 1};
  for (int ax = 0; ax < 4; ++ax) st[ax] = (s[ax] == 1 && out[ax] != 1) ? 0 : full[ax];
}

Broadcast broadcast(const char* op, const Shape& a, const Shape& b) {
  Broadcast bc{};
  static const char* kAxis[4] = {"N", "C", "H", "W"};
  std::int64_t dims[4];
  for (int ax = 0; ax < 4; ++ax) {
    const std::int64_t x = a[ax];
    const std::int64_t y = b[ax];
    if (x != y && x != 1 && y != 1) {
      throw DimensionError(std::string(op) + ": cannot broadcast " + a.str() + " with " + b.str() +
                           " on axis " + std::to_string(ax) + " (" + kAxis[ax] + ")");
    }
    dims[ax] = x == 1 ? y : x;
  }
  bc.out = {dims[0], dims[1], dims[2], dims[3]};
  bc.same = a == b;
  strides_for(a, bc.out, bc.sa);
  strides_for(b, bc.out, bc.sb);
  return bc;
}

// Calls f(out_index, a_index, b_index) in NCHW order.
template <class F>
void for_each_broadcast(const Broadcast& bc, F&& f) {
  const Shape& s = bc.out;
  std::int64_t o = 0;
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t c = 0; c < s.c; ++c)
      for (std::int64_t h = 0; h < s.h; ++h)
        for (std::int64_t w = 0; w < s.w; ++w, ++o) {
          const std::int64_t ia = n * bc.sa[0] + c * bc.sa[1] + h * bc.sa[2] + w * bc.sa[3];
          const std::int64_t ib = n * bc.sb[0] + c * bc.sb[1] + h * bc.sb[2] + w * bc.sb[3];
          f(o, ia, ib);
        }
}

enum class Binary { Add, Sub, Mul };

Tensor binary(Binary kind, const Tensor& a, const Tensor& b) {
  static const char* kNames[] = {"add", "sub", "mul"};
  const char* name = kNames[static_cast<int>(kind)];
  Broadcast bc = broadcast(name, a.shape(), b.shape());
  Tensor out = Tensor::zeros(bc.out);
  const float* pa = a.data().data();
  const float* pb = b.data().data();
  float* po = out.data().data();
  auto apply = [kind](float x, float y) {
    switch (kind) {
      case Binary::Add: return x + y;
      case Binary::Sub: return x - y;
      default: return x * y;
    }
  };
  if (bc.same) {
    const std::int64_t n = bc.out.numel();
    for (std::int64_t i = 0; i < n; ++i) po[i] = apply(pa[i], pb[i]);
  } else {
    for_each_broadcast(bc, [&](std::int64_t o, std::int64_t ia, std::int64_t ib) { po[o] = apply(pa[ia], pb[ib]); });
  }

  if (should_record({&a, &b})) {
    record(out, name, {a, b}, [a, b, bc, kind](const TensorImpl& o) mutable {
      const float* dy = o.grad.data();
      const float* pa = a.data().data();
      const float* pb = b.data().data();
      // d(out)/d(a) and d(out)/d(b) at a given element.
      auto ga = [&](std::int64_t, std::int64_t ib) { return kind == Binary::Mul ? pb[ib] : 1.0f; };
      auto gb = [&](std::int64_t ia, std::int64_t) {
        return kind == Binary::Mul ? pa[ia] : (kind == Binary::Sub ? -1.0f : 1.0f);
      };
      if (bc.same) {
        const std::int64_t n = bc.out.numel();
        if (a.requires_grad()) {
          auto da = a.grad_buffer();
          for (std::int64_t i = 0; i < n; ++i) da[i] += dy[i] * ga(i, i);
        }
        if (b.requires_grad()) {
          auto db = b.grad_buffer();
          for (std::int64_t i = 0; i < n; ++i) db[i] += dy[i] * gb(i, i);
        }
        return;
      }
      // Broadcast operands receive a reduction; accumulate it in double.
      if (a.requires_grad()) {
        std::vector<double> acc(static_cast<std::size_t>(a.numel()), 0.0);
        for_each_broadcast(bc, [&](std::int64_t i, std::int64_t ia, std::int64_t ib) {
          acc[ia] += static_cast<double>(dy[i]) * ga(ia, ib);
        });
        auto da = a.grad_buffer();
        for (std::size_t i = 0; i < acc.size(); ++i) da[i] += static_cast<float>(acc[i]);
      }
      if (b.requires_grad()) {
        std::vector<double> acc(static_cast<std::size_t>(b.numel()), 0.0);
        for_each_broadcast(bc, [&](std::int64_t i, std::int64_t ia, std::int64_t ib) {
          acc[ib] += static_cast<double>(dy[i]) * gb(ia, ib);
        });
        auto db = b.grad_buffer();
        for (std::size_t i = 0; i < acc.size(); ++i) db[i] += static_cast<float>(acc[i]);
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary(Binary::Add, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(Binary::Sub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(Binary::Mul, a, b); }

Tensor scale(const Tensor& input, float factor) {
  Tensor out = Tensor::zeros(input.shape());
  auto x = input.data();
  auto y = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * factor;
  if (should_record({&input})) {
    record(out, "scale", {input}, [input, factor](const TensorImpl& o) mutable {
      auto dx = input.grad_buffer();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += o.grad[i] * factor;
    });
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = Tensor::zeros(input.shape());
  auto x = input.data();
  auto y = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
  if (should_record({&input})) {
    record(out, "relu", {input}, [input](const TensorImpl& o) mutable {
      auto x = input.data();
      auto dx = input.grad_buffer();
      for (std::size_t i = 0; i < dx.size(); ++i)
        if (x[i] > 0.0f) dx[i] += o.grad[i];
    });
  }
  return out;
}

Tensor prelu(const Tensor& input, const Tensor& alpha) {
  const Shape& s = input.shape();
  if (alpha.shape() != Shape{1, s.c, 1, 1}) {
    throw DimensionError("prelu: alpha shape " + alpha.shape().str() + " does not match channels (axis 1) = " +
                         std::to_string(s.c));
  }
  Tensor out = Tensor::zeros(s);
  auto x = input.data();
  auto y = out.data();
  auto a = alpha.data();
  const std::int64_t plane = s.plane();
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t c = 0; c < s.c; ++c) {
      const std::size_t base = static_cast<std::size_t>((n * s.c + c) * plane);
      for (std::int64_t j = 0; j < plane; ++j) {
        const float v = x[base + j];
        y[base + j] = v > 0.0f ? v : a[c] * v;
      }
    }
  if (should_record({&input, &alpha})) {
    record(out, "prelu", {input, alpha}, [input, alpha, s](const TensorImpl& o) mutable {
      auto x = input.data();
      auto a = alpha.data();
      const std::int64_t plane = s.plane();
      const bool need_x = input.requires_grad();
      const bool need_a = alpha.requires_grad();
      std::span<float> dx = need_x ? input.grad_buffer() : std::span<float>{};
      std::vector<double> da(static_cast<std::size_t>(s.c), 0.0);
      for (std::int64_t n = 0; n < s.n; ++n)
        for (std::int64_t c = 0; c < s.c; ++c) {
          const std::size_t base = static_cast<std::size_t>((n * s.c + c) * plane);
          for (std::int64_t j = 0; j < plane; ++j) {
            const float v = x[base + j];
            const float g = o.grad[base + j];
            if (v > 0.0f) {
              if (need_x) dx[base + j] += g;
            } else {
              if (need_x) dx[base + j] += a[c] * g;
              da[c] += static_cast<double>(g) * v;
            }
          }
        }
      if (need_a) {
        auto ga = alpha.grad_buffer();
        for (std::int64_t c = 0; c < s.c; ++c) ga[c] += static_cast<float>(da[c]);
      }
    });
  }
  return out;
}

namespace {
const float kSigmoidLo = std::nextafter(0.0f, 1.0f);
const float kSigmoidHi = std::nextafter(1.0f, 0.0f);
}  // namespace

Tensor sigmoid(const Tensor& input) {
  Tensor out = Tensor::zeros(input.shape());
  auto x = input.data();
  auto y = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Branches keep exp() from overflowing for large |x|.
    const double v = x[i];
    const float r = static_cast<float>(v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)));
    // Saturated values are pulled back inside the open interval (0, 1).
    y[i] = std::clamp(r, kSigmoidLo, kSigmoidHi);
  }
  if (should_record({&input})) {
    record(out, "sigmoid", {input}, [input](const TensorImpl& o) mutable {
      auto dx = input.grad_buffer();
      for (std::size_t i = 0; i < dx.size(); ++i) {
        const float s = o.data[i];
        dx[i] += o.grad[i] * s * (1.0f - s);
      }
    });
  }
  return out;
}

}  // namespace drd::ops
