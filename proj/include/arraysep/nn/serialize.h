// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "arraysep/nn/params.h"

// Binary parameter container, little-endian:
//
//   char[8]  magic "ASEPPARM"
//   u32      version (kContainerVersion)
//   u64 len, bytes   fingerprint text
//   u64      step
//   u64      record count
//   per record:
//     u32 len, bytes  name
//     u32             rank
//     u64[rank]       dims
//     f64[numel]      values
namespace arraysep::nn {

inline constexpr std::uint32_t kContainerVersion = 1;

struct ParamRecord {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

struct ParamContainer {
  std::string fingerprint;
  std::uint64_t step = 0;
  std::vector<ParamRecord> records;
};

class SerializeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_container(const std::string& path, const ParamContainer& container);
ParamContainer read_container(const std::string& path);

template <typename Real>
std::vector<ParamRecord> to_records(const ParamSet<Real>& params);

// Copies record values into the set. Names and shapes must match one to one.
template <typename Real>
void load_records(const ParamSet<Real>& params, const std::vector<ParamRecord>& records);

}  // namespace arraysep::nn
