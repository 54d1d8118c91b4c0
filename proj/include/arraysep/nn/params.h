// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "arraysep/nn/tensor.h"

namespace arraysep::nn {

// Seeded generator shared by all initializers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Glorot-uniform values for a weight with the given fans.
template <typename Real>
std::vector<Real> xavier_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out, std::size_t count);

// Flat, ordered view of named learnable tensors. Tensors are shared handles,
// so updating a ParamSet entry updates the owning layer.
template <typename Real>
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor<Real> tensor;
  };

  void add(std::string name, Tensor<Real> tensor);
  void append(const ParamSet& other);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t num_values() const;

  // Throws std::out_of_range for an unknown name.
  Tensor<Real> get(const std::string& name) const;

  void zero_grad();
  std::vector<Tensor<Real>> tensors() const;

 private:
  std::vector<Entry> entries_;
};

extern template class ParamSet<float>;
extern template class ParamSet<double>;

}  // namespace arraysep::nn
