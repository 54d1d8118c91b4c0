// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/train/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace arraysep::train {

double si_sdr(std::span<const double> estimate, std::span<const double> reference, double clamp_db) {
  if (estimate.size() != reference.size()) {
    throw std::invalid_argument("si_sdr: length mismatch (" + std::to_string(estimate.size()) +
                                " vs " + std::to_string(reference.size()) + ")");
  }
  double dot = 0.0, ref_energy = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    dot += estimate[i] * reference[i];
    ref_energy += reference[i] * reference[i];
  }
  if (ref_energy == 0.0) throw std::invalid_argument("si_sdr: zero reference");
  const double alpha = dot / ref_energy;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = alpha * reference[i];
    const double e = s - estimate[i];
    target += s * s;
    residual += e * e;
  }
  if (residual == 0.0) return clamp_db;
  if (target == 0.0) return -clamp_db;
  return std::clamp(10.0 * std::log10(target / residual), -clamp_db, clamp_db);
}

double si_sdri(std::span<const double> estimate, std::span<const double> reference,
               std::span<const double> mixture, double clamp_db) {
  return si_sdr(estimate, reference, clamp_db) - si_sdr(mixture, reference, clamp_db);
}

UpitResult upit_loss(const std::vector<std::vector<double>>& estimates,
                     const std::vector<std::vector<double>>& references, double clamp_db) {
  const std::size_t k = estimates.size();
  if (k != references.size()) {
    throw std::invalid_argument("upit: " + std::to_string(k) + " estimates for " +
                                std::to_string(references.size()) + " references");
  }
  if (k == 0 || k > kMaxUpitSpeakers) {
    throw std::invalid_argument("upit: speaker count must be in 1.." +
                                std::to_string(kMaxUpitSpeakers));
  }
  std::vector<std::vector<double>> score(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) score[i][j] = si_sdr(estimates[i], references[j], clamp_db);
  }
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  UpitResult best;
  double best_mean = -INFINITY;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += score[i][perm[i]];
    const double mean = total / static_cast<double>(k);
    if (mean > best_mean) {
      best_mean = mean;
      best.perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.loss = -best_mean;
  for (std::size_t i = 0; i < k; ++i) best.per_speaker.push_back(score[i][best.perm[i]]);
  return best;
}

}  // namespace arraysep::train
