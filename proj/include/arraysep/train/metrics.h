// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace arraysep::train {

inline constexpr double kDefaultClampDb = 30.0;

// Scale-invariant SDR in dB:
//   alpha = <est, ref> / |ref|^2,  SI-SDR = 10 log10(|alpha ref|^2 / |alpha ref - est|^2)
// clamped to [-clamp_db, clamp_db]. A zero residual gives +clamp_db.
// Throws std::invalid_argument for a zero reference or length mismatch.
double si_sdr(std::span<const double> estimate, std::span<const double> reference,
              double clamp_db = kDefaultClampDb);

// si_sdr(estimate, reference) - si_sdr(mixture, reference)
double si_sdri(std::span<const double> estimate, std::span<const double> reference,
               std::span<const double> mixture, double clamp_db = kDefaultClampDb);

struct UpitResult {
  double loss = 0.0;  // -mean_k si_sdr(est_k, ref_perm[k]) at the best permutation
  // perm[k] is the reference index assigned to estimate k.
  std::vector<std::size_t> perm;
  std::vector<double> per_speaker;  // si_sdr at the best permutation
};

inline constexpr std::size_t kMaxUpitSpeakers = 4;

// Exhaustive search over all K! assignments, K <= 4. Ties keep the
// lexicographically first permutation.
UpitResult upit_loss(const std::vector<std::vector<double>>& estimates,
                     const std::vector<std::vector<double>>& references,
                     double clamp_db = kDefaultClampDb);

}  // namespace arraysep::train
