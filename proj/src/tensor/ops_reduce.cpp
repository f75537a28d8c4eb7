#include <algorithm>
#include <string>
#include <vector>

#include "drd/core/error.hpp"
#include "drd/tensor/ops.hpp"

namespace drd::ops {

Tensor global_avg_pool(const Tensor& input) {
  const Shape& s = input.shape();
  if (s.h < 1 || s.w < 1) throw DimensionError("global_avg_pool: empty spatial extent in " + s.str());
  const std::int64_t plane = s.plane();
  Tensor out = Tensor::zeros({s.n, s.c, 1, 1});
  auto x = input.data();
  auto y = out.data();
  for (std::int64_t i = 0; i < s.n * s.c; ++i) {
    double acc = 0.0;
    const float* p = x.data() + i * plane;
    for (std::int64_t j = 0; j < plane; ++j) acc += p[j];
    y[i] = static_cast<float>(acc / static_cast<double>(plane));
  }
  if (should_record({&input})) {
    record(out, "global_avg_pool", {input}, [input, s](const TensorImpl& o) mutable {
      const std::int64_t plane = s.plane();
      auto dx = input.grad_buffer();
      for (std::int64_t i = 0; i < s.n * s.c; ++i) {
        const float g = static_cast<float>(o.grad[i] / static_cast<double>(plane));
        float* p = dx.data() + i * plane;
        for (std::int64_t j = 0; j < plane; ++j) p[j] += g;
      }
    });
  }
  return out;
}

Tensor fully_connected(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  const Shape& s = input.shape();
  const Shape& ws = weight.shape();
  if (s.h != 1 || s.w != 1) {
    throw DimensionError("fully_connected: input must be (N, C, 1, 1), got " + s.str());
  }
  if (ws.h != 1 || ws.w != 1 || ws.c != s.c) {
    throw DimensionError("fully_connected: weight " + ws.str() + " inner dim (axis 1) must equal input channels " +
                         std::to_string(s.c));
  }
  if (bias.defined() && bias.shape() != Shape{1, ws.n, 1, 1}) {
    throw DimensionError("fully_connected: bias shape " + bias.shape().str() + " does not match outputs " +
                         std::to_string(ws.n));
  }
  const std::int64_t in = s.c;
  const std::int64_t outs = ws.n;
  Tensor out = Tensor::zeros({s.n, outs, 1, 1});
  auto x = input.data();
  auto w = weight.data();
  auto y = out.data();
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t o = 0; o < outs; ++o) {
      double acc = bias.defined() ? bias.data()[o] : 0.0;
      for (std::int64_t i = 0; i < in; ++i) acc += static_cast<double>(w[o * in + i]) * x[n * in + i];
      y[n * outs + o] = static_cast<float>(acc);
    }
  if (should_record({&input, &weight, &bias})) {
    record(out, "fully_connected", {input, weight, bias}, [input, weight, bias, s, outs](const TensorImpl& o) mutable {
      const std::int64_t in = s.c;
      auto x = input.data();
      auto w = weight.data();
      const float* dy = o.grad.data();
      if (input.requires_grad()) {
        auto dx = input.grad_buffer();
        for (std::int64_t n = 0; n < s.n; ++n)
          for (std::int64_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::int64_t k = 0; k < outs; ++k) acc += static_cast<double>(w[k * in + i]) * dy[n * outs + k];
            dx[n * in + i] += static_cast<float>(acc);
          }
      }
      if (weight.requires_grad()) {
        auto dw = weight.grad_buffer();
        for (std::int64_t k = 0; k < outs; ++k)
          for (std::int64_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::int64_t n = 0; n < s.n; ++n) acc += static_cast<double>(dy[n * outs + k]) * x[n * in + i];
            dw[k * in + i] += static_cast<float>(acc);
          }
      }
      if (bias.defined() && bias.requires_grad()) {
        auto db = bias.grad_buffer();
        for (std::int64_t k = 0; k < outs; ++k) {
          double acc = 0.0;
          for (std::int64_t n = 0; n < s.n; ++n) acc += dy[n * outs + k];
          db[k] += static_cast<float>(acc);
        }
      }
    });
  }
  return out;
}

Tensor concat_channels(std::span<const Tensor> inputs) {
  if (inputs.empty()) throw UsageError("concat_channels: no inputs");
  const Shape& first = inputs.front().shape();
  std::int64_t channels = 0;
  for (const Tensor& t : inputs) {
    const Shape& s = t.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw DimensionError("concat_channels: " + s.str() + " does not match " + first.str() +
                           " on N/H/W (axes 0, 2, 3)");
    }
    channels += s.c;
  }
  const Shape os{first.n, channels, first.h, first.w};
  Tensor out = Tensor::zeros(os);
  const std::int64_t plane = os.plane();
  auto y = out.data();
  std::vector<std::int64_t> offsets;
  std::int64_t offset = 0;
  for (const Tensor& t : inputs) {
    offsets.push_back(offset);
    auto x = t.data();
    const std::int64_t c = t.shape().c;
    for (std::int64_t n = 0; n < os.n; ++n)
      std::copy_n(x.data() + n * c * plane, c * plane, y.data() + (n * channels + offset) * plane);
    offset += c;
  }

  bool any = false;
  for (const Tensor& t : inputs) any = any || should_record({&t});
  if (any) {
    std::vector<Tensor> ins(inputs.begin(), inputs.end());
    record(out, "concat_channels", ins, [ins, offsets, os](const TensorImpl& o) mutable {
      const std::int64_t plane = os.plane();
      for (std::size_t k = 0; k < ins.size(); ++k) {
        Tensor& t = ins[k];
        if (!t.requires_grad()) continue;
        const std::int64_t c = t.shape().c;
        auto dx = t.grad_buffer();
        for (std::int64_t n = 0; n < os.n; ++n) {
          const float* src = o.grad.data() + (n * os.c + offsets[k]) * plane;
          float* dst = dx.data() + n * c * plane;
          for (std::int64_t j = 0; j < c * plane; ++j) dst[j] += src[j];
        }
      }
    });
  }
  return out;
}

Tensor slice_channels(const Tensor& input, std::int64_t begin, std::int64_t count) {
  const Shape& s = input.shape();
  if (begin < 0 || count < 0 || begin + count > s.c) {
    throw DimensionError("slice_channels: range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") outside channels (axis 1) = " + std::to_string(s.c));
  }
  const Shape os{s.n, count, s.h, s.w};
  const std::int64_t plane = s.plane();
  Tensor out = Tensor::zeros(os);
  auto x = input.data();
  auto y = out.data();
  for (std::int64_t n = 0; n < s.n; ++n)
    std::copy_n(x.data() + (n * s.c + begin) * plane, count * plane, y.data() + n * count * plane);
  if (should_record({&input})) {
    record(out, "slice_channels", {input}, [input, s, begin, count](const TensorImpl& o) mutable {
      const std::int64_t plane = s.plane();
      auto dx = input.grad_buffer();
      for (std::int64_t n = 0; n < s.n; ++n) {
        const float* src = o.grad.data() + n * count * plane;
        float* dst = dx.data() + (n * s.c + begin) * plane;
        for (std::int64_t j = 0; j < count * plane; ++j) dst[j] += src[j];
      }
    });
  }
  return out;
}

Tensor sum(const Tensor& input) {
  double acc = 0.0;
  for (float v : input.data()) acc += v;
  Tensor out = Tensor::scalar(static_cast<float>(acc));
  if (should_record({&input})) {
    record(out, "sum", {input}, [input](const TensorImpl& o) mutable {
      const float g = o.grad[0];
      for (float& d : input.grad_buffer()) d += g;
    });
  }
  return out;
}

Tensor squared_error_sum(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("squared_error_sum: shapes " + a.shape().str() + " and " + b.shape().str() + " differ");
  }
  auto x = a.data();
  auto y = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    acc += d * d;
  }
  Tensor out = Tensor::scalar(static_cast<float>(acc));
  if (should_record({&a, &b})) {
    record(out, "squared_error_sum", {a, b}, [a, b](const TensorImpl& o) mutable {
      const double g = o.grad[0];
      auto x = a.data();
      auto y = b.data();
      if (a.requires_grad()) {
        auto da = a.grad_buffer();
        for (std::size_t i = 0; i < da.size(); ++i)
          da[i] += static_cast<float>(2.0 * g * (static_cast<double>(x[i]) - y[i]));
      }
      if (b.requires_grad()) {
        auto db = b.grad_buffer();
        for (std::size_t i = 0; i < db.size(); ++i)
          db[i] -= static_cast<float>(2.0 * g * (static_cast<double>(x[i]) - y[i]));
      }
    });
  }
  return out;
}

Tensor linear_combination(std::span<const Tensor> terms, std::span<const double> weights) {
  if (terms.size() != weights.size()) throw UsageError("linear_combination: terms and weights differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) acc += weights[i] * static_cast<double>(terms[i].item());
  Tensor out = Tensor::scalar(static_cast<float>(acc));
  bool any = false;
  for (const Tensor& t : terms) any = any || should_record({&t});
  if (any) {
    std::vector<Tensor> ins(terms.begin(), terms.end());
    std::vector<double> ws(weights.begin(), weights.end());
    record(out, "linear_combination", ins, [ins, ws](const TensorImpl& o) mutable {
      for (std::size_t i = 0; i < ins.size(); ++i)
        if (ins[i].requires_grad()) ins[i].grad_buffer()[0] += static_cast<float>(ws[i] * o.grad[0]);
    });
  }
  return out;
}

}  // namespace drd::ops
