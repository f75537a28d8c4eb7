#pragma once

#include <cstddef>
#include <vector>

#include "drd/tensor/tensor.hpp"

namespace drd {

/// The recorded history behind one scalar loss, in topological order
/// (every node's inputs appear before it).
class Graph {
 public:
  /// Walks grad_fn links back from `loss`.
  static Graph capture(const Tensor& loss);

  /// Tensors that carry a grad_fn, inputs first.
  const std::vector<Tensor>& nodes() const { return nodes_; }

  /// Seeds d(loss)/d(loss) = 1 and runs every node's backward exactly once
  /// in reverse order, then drops the recorded history. Returns the number
  /// of nodes visited.
  std::size_t run_backward();

 private:
  Tensor loss_;
  std::vector<Tensor> nodes_;
};

/// Populates .grad on every requires_grad tensor reachable from `loss`.
/// Gradients accumulate; call zero_grad() between steps.
void backward(const Tensor& loss);

}  // namespace drd
