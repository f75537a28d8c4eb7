#include "drd/tensor/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "drd/core/error.hpp"

namespace drd {

std::int64_t Shape::operator[](int axis) const {
  switch (axis) {
    case 0: return n;
    case 1: return c;
    case 2: return h;
    case 3: return w;
    default: throw UsageError("Shape: axis out of range");
  }
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '(' << n << ',' << c << ',' << h << ',' << w << ')';
  return os.str();
}

Node::Node(std::string name, std::vector<Tensor> inputs, BackwardFn fn)
    : name_(std::move(name)), inputs_(std::move(inputs)), fn_(std::move(fn)) {}

namespace {

void check_shape(const Shape& s) {
  if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
    throw DimensionError("negative extent in shape " + s.str());
  }
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(shape, 0.0f, requires_grad); }

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
  check_shape(shape);
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->data.assign(static_cast<std::size_t>(shape.numel()), value);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from_data(Shape shape, std::vector<float> values, bool requires_grad) {
  check_shape(shape);
  if (static_cast<std::int64_t>(values.size()) != shape.numel()) {
    throw DimensionError("data length " + std::to_string(values.size()) + " does not match shape " +
                         shape.str());
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(float value, bool requires_grad) {
  return full({1, 1, 1, 1}, value, requires_grad);
}

TensorImpl& Tensor::checked() const {
  if (!impl_) throw UsageError("use of an undefined tensor");
  return *impl_;
}

const Shape& Tensor::shape() const { return checked().shape; }

std::span<float> Tensor::data() { return checked().data; }
std::span<const float> Tensor::data() const { return checked().data; }

float& Tensor::at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
  auto& t = checked();
  const auto& s = t.shape;
  return t.data[static_cast<std::size_t>(((n * s.c + c) * s.h + h) * s.w + w)];
}

float Tensor::at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
  const auto& t = checked();
  const auto& s = t.shape;
  return t.data[static_cast<std::size_t>(((n * s.c + c) * s.h + h) * s.w + w)];
}

float Tensor::item() const {
  const auto& t = checked();
  if (t.data.size() != 1) throw UsageError("item() on tensor of shape " + t.shape.str());
  return t.data[0];
}

bool Tensor::requires_grad() const { return checked().requires_grad; }
void Tensor::set_requires_grad(bool on) { checked().requires_grad = on; }
bool Tensor::has_grad() const { return !checked().grad.empty(); }
std::span<const float> Tensor::grad() const { return checked().grad; }

std::span<float> Tensor::grad_buffer() const {
  auto& t = checked();
  if (t.grad.empty()) t.grad.assign(t.data.size(), 0.0f);
  return t.grad;
}

void Tensor::zero_grad() {
  auto& t = checked();
  std::fill(t.grad.begin(), t.grad.end(), 0.0f);
}

Tensor Tensor::clone() const {
  const auto& t = checked();
  return from_data(t.shape, t.data, false);
}

const std::shared_ptr<Node>& Tensor::grad_fn() const { return checked().grad_fn; }
void Tensor::set_grad_fn(std::shared_ptr<Node> fn) { checked().grad_fn = std::move(fn); }

namespace {
thread_local bool grad_enabled = true;
}

bool GradMode::enabled() { return grad_enabled; }
void GradMode::set_enabled(bool on) { grad_enabled = on; }

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (!GradMode::enabled()) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t && t->defined() && t->requires_grad(); });
}

void record(Tensor& output, std::string name, std::vector<Tensor> inputs, Node::BackwardFn fn) {
  output.set_requires_grad(true);
  output.set_grad_fn(std::make_shared<Node>(std::move(name), std::move(inputs), std::move(fn)));
}

}  // namespace drd
