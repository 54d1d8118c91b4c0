// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/nn/tensor.h"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace arraysep::nn {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename Real>
Tensor<Real>::Tensor(Shape shape, Real fill) : node_(std::make_shared<Node<Real>>()) {
  node_->value.assign(nn::numel(shape), fill);
  node_->shape = std::move(shape);
}

template <typename Real>
Tensor<Real>::Tensor(Shape shape, std::vector<Real> values)
    : node_(std::make_shared<Node<Real>>()) {
  if (values.size() != nn::numel(shape)) {
    throw std::invalid_argument("tensor: " + std::to_string(values.size()) +
                                " values for shape " + to_string(shape));
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
}

template <typename Real>
Tensor<Real> Tensor<Real>::parameter(Shape shape, std::vector<Real> values) {
  Tensor t(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  return t;
}

template <typename Real>
Real Tensor<Real>::item() const {
  if (numel() != 1) {
    throw std::logic_error("item() on tensor of shape " + to_string(shape()));
  }
  return node_->value[0];
}

template <typename Real>
void Tensor<Real>::zero_grad() {
  if (has_grad()) std::fill(node_->grad.begin(), node_->grad.end(), Real(0));
}

template <typename Real>
void Tensor<Real>::backward() const {
  if (numel() != 1) {
    throw std::logic_error("backward() needs a single-element tensor, got " +
                           to_string(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; graphs can be thousands of nodes deep.
  std::vector<Node<Real>*> order;
  std::unordered_set<Node<Real>*> visited;
  std::vector<std::pair<Node<Real>*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<Real>* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->ensure_grad()[0] += Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<Real>* n = *it;
    if (n->backward && n->grad.size() == n->value.size()) n->backward(*n);
  }
}

template <typename Real>
Tensor<Real> Tensor<Real>::detach() const {
  return Tensor(node_->shape, node_->value);
}

template <typename Real>
Tensor<Real> Tensor<Real>::from_op(Shape shape, std::vector<Real> values,
                                   std::initializer_list<Tensor> parents,
                                   BackwardFn<Real> backward) {
  return from_op(std::move(shape), std::move(values),
                 std::vector<Tensor>(parents), std::move(backward));
}

template <typename Real>
Tensor<Real> Tensor<Real>::from_op(Shape shape, std::vector<Real> values,
                                   const std::vector<Tensor>& parents,
                                   BackwardFn<Real> backward) {
  Tensor out(std::move(shape), std::move(values));
  if (!g_grad_enabled) return out;
  const bool any = std::any_of(parents.begin(), parents.end(), [](const Tensor& p) {
    return p.defined() && p.requires_grad();
  });
  if (!any) return out;
  out.node_->requires_grad = true;
  for (const auto& p : parents) {
    // Undefined optional inputs (e.g. a missing bias) become inert leaves so
    // that parent indices stay stable inside backward closures.
    out.node_->parents.push_back(p.defined() ? p.node_ : std::make_shared<Node<Real>>());
  }
  out.node_->backward = std::move(backward);
  return out;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace arraysep::nn
