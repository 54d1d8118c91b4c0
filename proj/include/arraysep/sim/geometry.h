// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace arraysep::sim {

using Point3 = std::array<double, 3>;

double distance(const Point3& a, const Point3& b);

// Microphone positions in meters plus a short tag such as "C-8-5" (circular,
// 8 mics, 5 cm radius) or "L-2-10" (linear, 2 mics, 10 cm spacing).
struct ArrayGeometry {
  std::vector<Point3> mic_positions;
  std::string label;

  std::size_t size() const { return mic_positions.size(); }
  // Throws std::invalid_argument for an empty array or coincident mics.
  void validate() const;
};

// n mics evenly spaced on a horizontal circle centered at the origin, mic 0
// at (radius, 0, 0).
ArrayGeometry circular_array(std::size_t n, double radius_m);
// n mics on the x axis, centered at the origin.
ArrayGeometry linear_array(std::size_t n, double spacing_m);

// Parses "C-<n>-<radius cm>" or "L-<n>-<spacing cm>", optionally followed by
// a subset selector "{i,j,...}", e.g. "C-8-5{0,3,5}".
ArrayGeometry geometry_from_label(const std::string& label);

// Restricts to the given mic indices, preserving their order.
ArrayGeometry subset(const ArrayGeometry& geometry,
                     std::span<const std::size_t> indices);

ArrayGeometry translate(const ArrayGeometry& geometry, const Point3& offset);

// Reorders mics so that new mic i is old mic permutation[i].
ArrayGeometry permute_channels(const ArrayGeometry& geometry,
                               std::span<const std::size_t> permutation);

// Throws std::invalid_argument unless permutation is a permutation of 0..n-1.
void check_permutation(std::span<const std::size_t> permutation, std::size_t n);

}  // namespace arraysep::sim
