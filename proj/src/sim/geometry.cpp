// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/sim/geometry.h"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>

namespace arraysep::sim {

namespace {

std::string centimeters(double meters) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", meters * 100.0);
  return buf;
}

std::string index_list(std::span<const std::size_t> indices) {
  std::string s = "{";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(indices[i]);
  }
  return s + "}";
}

}  // namespace

double distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void ArrayGeometry::validate() const {
  if (mic_positions.empty()) {
    throw std::invalid_argument("array geometry has no microphones");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      if (distance(mic_positions[i], mic_positions[j]) < 1e-9) {
        throw std::invalid_argument("microphones " + std::to_string(i) +
                                    " and " + std::to_string(j) + " coincide");
      }
    }
  }
}

ArrayGeometry circular_array(std::size_t n, double radius_m) {
  if (n == 0 || !(radius_m > 0.0)) {
    throw std::invalid_argument("circular_array: need n >= 1 and radius > 0");
  }
  ArrayGeometry g;
  g.label = "C-" + std::to_string(n) + "-" + centimeters(radius_m);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) /
                       static_cast<double>(n);
    g.mic_positions.push_back({radius_m * std::cos(phi), radius_m * std::sin(phi), 0.0});
  }
  return g;
}

ArrayGeometry linear_array(std::size_t n, double spacing_m) {
  if (n == 0 || !(spacing_m > 0.0)) {
    throw std::invalid_argument("linear_array: need n >= 1 and spacing > 0");
  }
  ArrayGeometry g;
  g.label = "L-" + std::to_string(n) + "-" + centimeters(spacing_m);
  const double mid = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    g.mic_positions.push_back({(static_cast<double>(i) - mid) * spacing_m, 0.0, 0.0});
  }
  return g;
}

ArrayGeometry geometry_from_label(const std::string& label) {
  const auto brace = label.find('{');
  const std::string base = label.substr(0, brace);
  char kind = 0;
  unsigned n = 0;
  double cm = 0.0;
  int consumed = 0;
  if (std::sscanf(base.c_str(), "%c-%u-%lf%n", &kind, &n, &cm, &consumed) != 3 ||
      static_cast<std::size_t>(consumed) != base.size()) {
    throw std::invalid_argument("bad geometry label '" + label + "'");
  }
  ArrayGeometry g;
  if (kind == 'C') {
    g = circular_array(n, cm / 100.0);
  } else if (kind == 'L') {
    g = linear_array(n, cm / 100.0);
  } else {
    throw std::invalid_argument("geometry label must start with C or L: '" +
                                label + "'");
  }
  if (brace == std::string::npos) return g;

  const auto close = label.find('}', brace);
  if (close == std::string::npos || close + 1 != label.size()) {
    throw std::invalid_argument("unterminated subset in '" + label + "'");
  }
  std::vector<std::size_t> indices;
  std::string body = label.substr(brace + 1, close - brace - 1);
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t next = body.find(',', pos);
    if (next == std::string::npos) next = body.size();
    indices.push_back(std::stoul(body.substr(pos, next - pos)));
    pos = next + 1;
  }
  return subset(g, indices);
}

void check_permutation(std::span<const std::size_t> permutation, std::size_t n) {
  if (permutation.size() != n) {
    throw std::invalid_argument("permutation has " +
                                std::to_string(permutation.size()) +
                                " entries, expected " + std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (auto p : permutation) {
    if (p >= n || seen[p]) {
      throw std::invalid_argument("not a permutation of 0.." +
                                  std::to_string(n - 1));
    }
    seen[p] = true;
  }
}

ArrayGeometry subset(const ArrayGeometry& geometry,
                     std::span<const std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("subset: no indices");
  std::vector<bool> used(geometry.size(), false);
  ArrayGeometry out;
  for (auto i : indices) {
    if (i >= geometry.size()) {
      throw std::out_of_range("subset: mic index " + std::to_string(i) +
                              " out of range for " +
                              std::to_string(geometry.size()) + " mics");
    }
    if (used[i]) throw std::invalid_argument("subset: repeated index");
    used[i] = true;
    out.mic_positions.push_back(geometry.mic_positions[i]);
  }
  out.label = geometry.label + index_list(indices);
  return out;
}

ArrayGeometry translate(const ArrayGeometry& geometry, const Point3& offset) {
  ArrayGeometry out = geometry;
  for (auto& p : out.mic_positions) {
    for (int k = 0; k < 3; ++k) p[k] += offset[k];
  }
  return out;
}

ArrayGeometry permute_channels(const ArrayGeometry& geometry,
                               std::span<const std::size_t> permutation) {
  check_permutation(permutation, geometry.size());
  ArrayGeometry out;
  out.label = geometry.label;
  for (auto p : permutation) out.mic_positions.push_back(geometry.mic_positions[p]);
  return out;
}

}  // namespace arraysep::sim
