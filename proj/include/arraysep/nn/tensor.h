// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace arraysep::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

template <typename Real>
struct Node;

template <typename Real>
using BackwardFn = std::function<void(Node<Real>&)>;

// Graph node. Gradients accumulate across backward passes until cleared.
template <typename Real>
struct Node {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn<Real> backward;

  std::vector<Real>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), Real(0));
    return grad;
  }
};

// Shared handle to a graph node. Copies alias the same storage.
template <typename Real>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0));
  Tensor(Shape shape, std::vector<Real> values);

  // Leaf that accumulates gradients.
  static Tensor parameter(Shape shape, std::vector<Real> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return node_->value.size(); }

  std::span<Real> data() { return node_->value; }
  std::span<const Real> data() const { return node_->value; }
  Real item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }
  // Allocates a zero gradient on first use.
  std::span<Real> grad() { return node_->ensure_grad(); }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  void zero_grad();

  // Reverse-mode sweep from a single-element tensor, seeding d(self) = 1.
  void backward() const;

  // Same values, no graph history.
  Tensor detach() const;

  Node<Real>* node() const { return node_.get(); }
  const std::shared_ptr<Node<Real>>& node_ptr() const { return node_; }

  // Result of an op. The backward closure and parent links are kept only
  // when gradient recording is enabled and some parent requires a gradient.
  static Tensor from_op(Shape shape, std::vector<Real> values,
                        std::initializer_list<Tensor> parents,
                        BackwardFn<Real> backward);
  static Tensor from_op(Shape shape, std::vector<Real> values,
                        const std::vector<Tensor>& parents,
                        BackwardFn<Real> backward);

 private:
  std::shared_ptr<Node<Real>> node_;
};

// Thread-local switch for graph recording.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Helper used inside backward closures: gradient buffer of parent i, or
// nullptr when that parent does not take gradients.
template <typename Real>
Real* parent_grad(Node<Real>& node, std::size_t i) {
  auto& p = node.parents[i];
  return p->requires_grad ? p->ensure_grad().data() : nullptr;
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace arraysep::nn
