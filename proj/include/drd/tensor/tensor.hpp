#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace drd {

/// NCHW extent of a tensor.
struct Shape {
  std::int64_t n = 0;
  std::int64_t c = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;

  std::int64_t numel() const { return n * c * h * w; }
  std::int64_t plane() const { return h * w; }
  std::int64_t operator[](int axis) const;
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

class Tensor;
struct TensorImpl;

/// A recorded operation. Holds its inputs alive until backward has run.
class Node {
 public:
  using BackwardFn = std::function<void(const TensorImpl& output)>;

  Node(std::string name, std::vector<Tensor> inputs, BackwardFn fn);

  const std::string& name() const { return name_; }
  const std::vector<Tensor>& inputs() const { return inputs_; }

  /// Accumulates into the inputs' gradients given output.grad.
  void backward(const TensorImpl& output) const { fn_(output); }

 private:
  std::string name_;
  std::vector<Tensor> inputs_;
  BackwardFn fn_;
};

struct TensorImpl {
  Shape shape;
  std::vector<float> data;
  std::vector<float> grad;  // empty until a gradient arrives
  bool requires_grad = false;
  std::shared_ptr<Node> grad_fn;
};

/// Shared handle to a dense float32 NCHW array. Copies of a Tensor alias the
/// same storage; use clone() for an independent copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, float value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<float> values, bool requires_grad = false);
  static Tensor scalar(float value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::int64_t numel() const { return shape().numel(); }

  std::span<float> data();
  std::span<const float> data() const;
  float& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w);
  float at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const;
  /// Value of a one-element tensor.
  float item() const;

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  /// Gradient view; empty when none has been accumulated.
  std::span<const float> grad() const;
  /// Allocates a zero gradient if absent and returns it for accumulation.
  std::span<float> grad_buffer() const;
  void zero_grad();

  /// Deep copy of data only: no gradient, no history, requires_grad false.
  Tensor clone() const;

  const std::shared_ptr<Node>& grad_fn() const;
  void set_grad_fn(std::shared_ptr<Node> fn);

  TensorImpl* impl() const { return impl_.get(); }
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  TensorImpl& checked() const;

  std::shared_ptr<TensorImpl> impl_;
};

/// Thread-local switch for graph recording.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool on);
};

/// Disables graph recording for its lifetime (inference, finite differences).
class NoGradGuard {
 public:
  NoGradGuard() : previous_(GradMode::enabled()) { GradMode::set_enabled(false); }
  ~NoGradGuard() { GradMode::set_enabled(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// True when grad mode is on and any input requires a gradient.
bool should_record(std::initializer_list<const Tensor*> inputs);

/// Marks `output` as produced by `name` over `inputs` when recording.
void record(Tensor& output, std::string name, std::vector<Tensor> inputs, Node::BackwardFn fn);

}  // namespace drd
