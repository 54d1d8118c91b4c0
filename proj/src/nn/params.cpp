// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/nn/params.h"

#include <cmath>
#include <stdexcept>

namespace arraysep::nn {

template <typename Real>
std::vector<Real> xavier_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out, std::size_t count) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<Real> v(count);
  for (auto& x : v) x = static_cast<Real>(rng.uniform(-limit, limit));
  return v;
}

template <typename Real>
void ParamSet<Real>::add(std::string name, Tensor<Real> tensor) {
  for (const auto& e : entries_) {
    if (e.name == name) throw std::invalid_argument("duplicate parameter name: " + name);
  }
  tensor.set_requires_grad(true);
  entries_.push_back({std::move(name), std::move(tensor)});
}

template <typename Real>
void ParamSet<Real>::append(const ParamSet& other) {
  for (const auto& e : other.entries_) add(e.name, e.tensor);
}

template <typename Real>
std::size_t ParamSet<Real>::num_values() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

template <typename Real>
Tensor<Real> ParamSet<Real>::get(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw std::out_of_range("no parameter named " + name);
}

template <typename Real>
void ParamSet<Real>::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

template <typename Real>
std::vector<Tensor<Real>> ParamSet<Real>::tensors() const {
  std::vector<Tensor<Real>> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.tensor);
  return out;
}

template std::vector<float> xavier_uniform<float>(Rng&, std::size_t, std::size_t, std::size_t);
template std::vector<double> xavier_uniform<double>(Rng&, std::size_t, std::size_t, std::size_t);
template class ParamSet<float>;
template class ParamSet<double>;

}  // namespace arraysep::nn
