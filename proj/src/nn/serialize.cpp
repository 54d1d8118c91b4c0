// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/nn/serialize.h"

#include <cstring>
#include <fstream>
#include <unordered_map>

namespace arraysep::nn {

namespace {

constexpr char kMagic[8] = {'A', 'S', 'E', 'P', 'P', 'A', 'R', 'M'};
// Guards against absurd allocations from corrupt files.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw SerializeError("parameter file truncated");
  return v;
}

std::string get_string(std::istream& in, std::uint64_t len) {
  if (len > (1u << 20)) throw SerializeError("parameter file: string length out of range");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw SerializeError("parameter file truncated");
  return s;
}

}  // namespace

void write_container(const std::string& path, const ParamContainer& c) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SerializeError("cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kContainerVersion);
  put<std::uint64_t>(out, c.fingerprint.size());
  out.write(c.fingerprint.data(), static_cast<std::streamsize>(c.fingerprint.size()));
  put<std::uint64_t>(out, c.step);
  put<std::uint64_t>(out, c.records.size());
  for (const auto& r : c.records) {
    if (r.values.size() != numel(r.shape)) {
      throw SerializeError("record " + r.name + " has inconsistent shape");
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
    out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(r.shape.size()));
    for (auto d : r.shape) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(r.values.data()),
              static_cast<std::streamsize>(r.values.size() * sizeof(double)));
  }
  if (!out) throw SerializeError("write failed for " + path);
}

ParamContainer read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SerializeError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw SerializeError(path + " is not a parameter file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kContainerVersion) {
    throw SerializeError("unsupported parameter file version " + std::to_string(version));
  }
  ParamContainer c;
  c.fingerprint = get_string(in, get<std::uint64_t>(in));
  c.step = get<std::uint64_t>(in);
  const auto count = get<std::uint64_t>(in);
  if (count > kMaxElements) throw SerializeError("parameter file: record count out of range");
  c.records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    ParamRecord r;
    r.name = get_string(in, get<std::uint32_t>(in));
    const auto rank = get<std::uint32_t>(in);
    if (rank > 8) throw SerializeError("record " + r.name + ": rank out of range");
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const auto d = get<std::uint64_t>(in);
      r.shape.push_back(d);
      n *= d;
      if (n > kMaxElements) throw SerializeError("record " + r.name + ": size out of range");
    }
    r.values.resize(n);
    in.read(reinterpret_cast<char*>(r.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw SerializeError("parameter file truncated in record " + r.name);
    c.records.push_back(std::move(r));
  }
  return c;
}

template <typename Real>
std::vector<ParamRecord> to_records(const ParamSet<Real>& params) {
  std::vector<ParamRecord> out;
  for (const auto& e : params.entries()) {
    ParamRecord r{e.name, e.tensor.shape(), {}};
    r.values.assign(e.tensor.data().begin(), e.tensor.data().end());
    out.push_back(std::move(r));
  }
  return out;
}

template <typename Real>
void load_records(const ParamSet<Real>& params, const std::vector<ParamRecord>& records) {
  if (records.size() != params.size()) {
    throw SerializeError("parameter count mismatch: file has " + std::to_string(records.size()) +
                         ", model has " + std::to_string(params.size()));
  }
  std::unordered_map<std::string, const ParamRecord*> by_name;
  for (const auto& r : records) by_name[r.name] = &r;
  for (const auto& e : params.entries()) {
    auto it = by_name.find(e.name);
    if (it == by_name.end()) throw SerializeError("missing parameter " + e.name);
    if (it->second->shape != e.tensor.shape()) {
      throw SerializeError("shape mismatch for " + e.name + ": file " +
                           to_string(it->second->shape) + ", model " + to_string(e.tensor.shape()));
    }
  }
  for (const auto& e : params.entries()) {
    Tensor<Real> t = e.tensor;
    const auto& v = by_name.at(e.name)->values;
    for (std::size_t i = 0; i < v.size(); ++i) t.data()[i] = static_cast<Real>(v[i]);
  }
}

template std::vector<ParamRecord> to_records<float>(const ParamSet<float>&);
template std::vector<ParamRecord> to_records<double>(const ParamSet<double>&);
template void load_records<float>(const ParamSet<float>&, const std::vector<ParamRecord>&);
template void load_records<double>(const ParamSet<double>&, const std::vector<ParamRecord>&);

}  // namespace arraysep::nn
