// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/nn/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "arraysep/nn/ops.h"

namespace arraysep::nn {

GradCheckResult grad_check(const std::function<Tensor<double>()>& f,
                           const std::vector<Tensor<double>>& wrt,
                           const GradCheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (auto t : wrt) {
    if (!t.requires_grad()) throw std::invalid_argument("grad_check: tensor does not require grad");
    t.zero_grad();
  }

  const Tensor<double> probe = f();
  std::vector<double> weights(probe.numel());
  for (auto& w : weights) w = normal(rng);

  weighted_sum(probe, weights).backward();

  auto objective = [&]() {
    NoGradGuard guard;
    const Tensor<double> y = f();
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * y.data()[i];
    return s;
  };

  GradCheckResult result;
  result.evaluations = 1;
  for (auto t : wrt) {
    const std::size_t n = t.numel();
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_tensor > 0 && n > options.max_coords_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_tensor);
    }
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    double diff2 = 0.0, a2 = 0.0, fd2 = 0.0;
    for (std::size_t i : coords) {
      double& v = t.data()[i];
      const double saved = v;
      v = saved + options.eps;
      const double up = objective();
      v = saved - options.eps;
      const double down = objective();
      v = saved;
      result.evaluations += 2;
      const double fd = (up - down) / (2.0 * options.eps);
      diff2 += (fd - analytic[i]) * (fd - analytic[i]);
      a2 += analytic[i] * analytic[i];
      fd2 += fd * fd;
    }
    const double scale = std::max({std::sqrt(a2), std::sqrt(fd2), options.norm_floor});
    const double err = std::sqrt(diff2) / scale;
    result.per_tensor.push_back(err);
    result.max_error = std::max(result.max_error, err);
  }
  return result;
}

}  // namespace arraysep::nn
