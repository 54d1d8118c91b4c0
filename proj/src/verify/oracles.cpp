// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/verify/oracles.h"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace arraysep::verify {

VmeOracle vme_oracle(std::size_t real_channels, std::size_t max_channels) {
  if (real_channels < 1 || real_channels > max_channels) {
    throw std::invalid_argument("vme_oracle: need 1 <= C <= M");
  }
  VmeOracle o;
  const std::size_t nv = max_channels - real_channels;
  const std::size_t np = real_channels;
  for (std::size_t i = 1; i <= np; ++i) {
    o.pairs.emplace_back(i - 1, i % np);
    const std::size_t extra = i <= nv % np ? 1 : 0;
    o.counts.push_back(nv / np + extra);
  }
  for (std::size_t n : o.counts) {
    for (std::size_t k = 1; k <= n; ++k) {
      o.alphas.push_back(static_cast<double>(k) / static_cast<double>(n + 1));
    }
  }
  return o;
}

std::size_t frame_count_oracle(std::size_t num_samples, const dsp::StftConfig& config) {
  const std::size_t win = config.window_length();
  const std::size_t hop = config.hop();
  const std::size_t padded = num_samples + 2 * (win / 2);
  std::size_t frames = 0;
  for (std::size_t start = 0; start + win <= padded; start += hop) ++frames;
  return frames;
}

double sdl_projection_oracle(const std::vector<std::complex<double>>& d,
                             const std::vector<std::complex<double>>& x, bool hermitian) {
  if (d.size() != x.size()) throw std::invalid_argument("sdl oracle: size mismatch");
  std::complex<double> p = 0.0;
  double nd = 0.0, nx = 0.0;
  for (std::size_t m = 0; m < d.size(); ++m) {
    p += (hermitian ? std::conj(d[m]) : d[m]) * x[m];
    nd += std::norm(d[m]);
    nx += std::norm(x[m]);
  }
  if (nx == 0.0) return 0.0;
  return std::norm(p) / (nd * nx);
}

train::UpitResult upit_oracle(const std::vector<std::vector<double>>& estimates,
                              const std::vector<std::vector<double>>& references,
                              double clamp_db) {
  const std::size_t k = estimates.size();
  if (k == 0 || k != references.size()) throw std::invalid_argument("upit oracle: bad sizes");
  train::UpitResult best;
  bool have = false;
  double best_mean = 0.0;
  std::vector<std::size_t> perm;
  std::vector<bool> used(k, false);

  // Lexicographic enumeration: position i tries references in increasing
  // order, so the first optimum found is the lexicographically smallest.
  std::function<void()> recurse = [&]() {
    if (perm.size() == k) {
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        total += train::si_sdr(estimates[i], references[perm[i]], clamp_db);
      }
      const double mean = total / static_cast<double>(k);
      if (!have || mean > best_mean) {
        have = true;
        best_mean = mean;
        best.perm = perm;
      }
      return;
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (used[j]) continue;
      used[j] = true;
      perm.push_back(j);
      recurse();
      perm.pop_back();
      used[j] = false;
    }
  };
  recurse();
  best.loss = -best_mean;
  for (std::size_t i = 0; i < k; ++i) {
    best.per_speaker.push_back(train::si_sdr(estimates[i], references[best.perm[i]], clamp_db));
  }
  return best;
}

}  // namespace arraysep::verify
