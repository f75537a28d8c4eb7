#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "drd/core/rng.hpp"
#include "drd/tensor/tensor.hpp"

namespace drd::nn {

enum class StateKind { parameter, buffer };

struct NamedTensor {
  std::string name;
  Tensor value;  // aliases the module's storage
  StateKind kind;
};

/// Base of every layer and block. A module owns parameters and buffers
/// (batch-norm running statistics) and a list of named children; state is
/// enumerated depth-first in declaration order, which fixes the checkpoint
/// layout.
class Module {
 public:
  using Visitor = std::function<void(const std::string& name, Tensor& value, StateKind kind)>;

  Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;
  virtual ~Module() = default;

  void visit(const std::string& prefix, const Visitor& fn);
  void set_training(bool on);
  bool training() const { return training_; }
  void reset_parameters(Rng& rng);

 protected:
  virtual void visit_own(const std::string& prefix, const Visitor& fn) {}
  virtual void reset_own(Rng& rng) {}
  virtual std::vector<std::pair<std::string, Module*>> children() { return {}; }

  bool training_ = true;
};

std::string join_name(const std::string& prefix, const std::string& name);

std::vector<NamedTensor> named_state(Module& m, const std::string& prefix = "");
std::vector<NamedTensor> named_parameters(Module& m, const std::string& prefix = "");

std::int64_t count_parameters(Module& m);

/// Parameter scalars grouped by owning layer (name minus its last
/// component), in state order.
std::vector<std::pair<std::string, std::int64_t>> parameter_breakdown(Module& m, const std::string& prefix = "");

void zero_grad(Module& m);

/// Deterministic probe initialization for impulse-response analysis:
/// convolution and affine weights set to `weight`, biases and BN shift 0,
/// BN scale 1 with identity running statistics, PReLU slopes untouched.
void fill_probe(Module& m, float weight);

}  // namespace drd::nn
