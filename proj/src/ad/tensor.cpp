#include "aublend/ad/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "aublend/error.hpp"

namespace aublend::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one extent");
  for (auto e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + to_string(shape));
  }
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("shape " + to_string(shape) + " does not match " + std::to_string(values.size()) +
                     " values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in tensor construction");
  }
  node_ = std::make_shared<Node>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({1}, {value}, requires_grad); }

std::size_t Tensor::rows() const { return shape().size() >= 2 ? shape()[shape().size() - 2] : 1; }

std::size_t Tensor::cols() const { return shape().back(); }

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + to_string(shape()));
  return node_->value[0];
}

Tensor Tensor::clone(bool requires_grad) const {
  return Tensor(node_->shape, node_->value, requires_grad);
}

namespace {

// Reverse topological order (root first) over nodes that require grad.
std::vector<Node*> reverse_topo(Node* root) {
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return {order.rbegin(), order.rend()};
}

}  // namespace

void Tensor::backward() const {
  if (!node_) throw ContractError("backward() on undefined tensor");
  if (numel() != 1) {
    throw ContractError("backward() requires a scalar loss, got shape " + to_string(shape()));
  }
  if (node_->consumed) throw ContractError("backward() called twice on the same graph");
  node_->consumed = true;
  if (!node_->requires_grad) return;

  auto order = reverse_topo(node_.get());
  node_->grad_buffer()[0] += 1.0;
  for (Node* n : order) {
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  // Release the recorded graph; interior values and grads stay readable.
  // Leaf-most nodes go first so no node is freed before it is visited.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) {
      n->backward = nullptr;
      n->parents.clear();
    }
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

std::string trace(const Tensor& root) {
  std::vector<Node*> order;
  std::unordered_map<Node*, std::size_t> ids;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.node().get(), 0}};
  ids.emplace(root.node().get(), 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (ids.emplace(p, 0).second) stack.emplace_back(p, 0);
    } else {
      ids[node] = order.size();
      order.push_back(node);
      stack.pop_back();
    }
  }
  std::ostringstream os;
  for (Node* n : order) {
    os << '%' << ids[n] << " = " << n->op << ' ' << to_string(n->shape);
    if (n->requires_grad) os << " grad";
    if (!n->parents.empty()) {
      os << " <-";
      for (auto& p : n->parents) os << " %" << ids[p.get()];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace aublend::ad
