#include "drd/tensor/graph.hpp"

#include <unordered_set>
#include <utility>

#include "drd/core/error.hpp"

namespace drd {

Graph Graph::capture(const Tensor& loss) {
  if (!loss.defined()) throw UsageError("backward on an undefined tensor");
  if (loss.numel() != 1) {
    throw UsageError("backward requires a scalar loss, got shape " + loss.shape().str());
  }
  if (!loss.requires_grad()) throw UsageError("backward on a tensor that does not require grad");

  Graph g;
  g.loss_ = loss;
  // Iterative post-order DFS so deep networks do not exhaust the stack.
  std::unordered_set<const TensorImpl*> visited;
  std::vector<std::pair<Tensor, std::size_t>> stack;
  if (loss.grad_fn()) {
    stack.emplace_back(loss, 0);
    visited.insert(loss.impl());
  }
  while (!stack.empty()) {
    auto& [t, next] = stack.back();
    const auto& inputs = t.grad_fn()->inputs();
    if (next < inputs.size()) {
      const Tensor& in = inputs[next++];
      if (in.defined() && in.grad_fn() && visited.insert(in.impl()).second) {
        stack.emplace_back(in, 0);
      }
      continue;
    }
    g.nodes_.push_back(t);
    stack.pop_back();
  }
  return g;
}

std::size_t Graph::run_backward() {
  auto seed = loss_.grad_buffer();
  seed[0] += 1.0f;
  std::size_t visited = 0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Tensor& t = *it;
    auto fn = t.grad_fn();
    if (!fn) continue;
    if (t.has_grad()) fn->backward(*t.impl());
    ++visited;
    // Release the history; the tape is rebuilt on the next forward pass.
    t.set_grad_fn(nullptr);
  }
  nodes_.clear();
  return visited;
}

void backward(const Tensor& loss) { Graph::capture(loss).run_backward(); }

}  // namespace drd
