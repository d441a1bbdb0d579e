// Copyright 2026 The roomtone Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "roomtone/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace roomtone::serialize {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace {

class Writer {
 public:
  explicit Writer(const std::string& path) : f_(path, std::ios::binary) {
    if (!f_) throw IoError("cannot open for writing: " + path);
    path_ = path;
  }
  ~Writer() = default;

  void bytes(const void* p, std::size_t n) {
    f_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!f_) throw IoError("short write: " + path_);
  }
  void u32(uint32_t v) { bytes(&v, 4); }
  void u64(uint64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void f64s(const std::vector<double>& v) {
    bytes(v.data(), v.size() * sizeof(double));
  }
  void magic(const char m[5]) { bytes(m, 4); }

 private:
  std::ofstream f_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : f_(path, std::ios::binary) {
    if (!f_) throw IoError("cannot open: " + path);
    path_ = path;
  }

  void bytes(void* p, std::size_t n) {
    f_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (f_.gcount() != static_cast<std::streamsize>(n))
      throw InputError("truncated file: " + path_);
  }
  uint32_t u32() {
    uint32_t v;
    bytes(&v, 4);
    return v;
  }
  uint64_t u64() {
    uint64_t v;
    bytes(&v, 8);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, 8);
    return v;
  }
  std::vector<double> f64s(std::size_t n) {
    std::vector<double> v(n);
    bytes(v.data(), n * sizeof(double));
    return v;
  }
  void expect_magic(const char m[5]) {
    char got[4];
    bytes(got, 4);
    if (std::memcmp(got, m, 4) != 0)
      throw InputError("bad magic in " + path_);
  }

 private:
  std::ifstream f_;
  std::string path_;
};

void write_vec3(Writer& w, const Vec3& v) {
  w.f64(v.x);
  w.f64(v.y);
  w.f64(v.z);
}

Vec3 read_vec3(Reader& r) {
  Vec3 v;
  v.x = r.f64();
  v.y = r.f64();
  v.z = r.f64();
  return v;
}

constexpr uint32_t kVersion = 1;

}  // namespace

void write_pathset(const PathSet& set, const std::string& path) {
  Writer w(path);
  w.magic("PSET");
  w.u32(kVersion);
  w.u32(static_cast<uint32_t>(set.band_count));
  w.u64(set.paths.size());
  write_vec3(w, set.source);
  write_vec3(w, set.listener);
  w.u64(set.seed);
  w.u64(set.ray_budget);
  for (const auto& p : set.paths) {
    w.f64(p.arrival_time);
    write_vec3(w, p.direction);
    w.f64s(p.band_energy);
    w.u32(static_cast<uint32_t>(p.material_seq.size()));
    if (!p.material_seq.empty())
      w.bytes(p.material_seq.data(), p.material_seq.size() * 4);
    w.f64s(p.air_factor);
  }
}

PathSet read_pathset(const std::string& path) {
  Reader r(path);
  r.expect_magic("PSET");
  if (r.u32() != kVersion) throw InputError("unsupported PSET version");
  const auto bands = r.u32();
  const auto count = r.u64();
  PathSet set;
  set.band_count = static_cast<int>(bands);
  set.source = read_vec3(r);
  set.listener = read_vec3(r);
  set.seed = r.u64();
  set.ray_budget = r.u64();
  set.paths.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    PathRecord p;
    p.arrival_time = r.f64();
    p.direction = read_vec3(r);
    p.band_energy = r.f64s(bands);
    const auto n = r.u32();
    p.material_seq.resize(n);
    if (n) r.bytes(p.material_seq.data(), n * 4u);
    p.air_factor = r.f64s(bands);
    set.paths.push_back(std::move(p));
  }
  return set;
}

void write_directional_ir(const irsynth::DirectionalIr& ir, double rate,
                          const std::string& path) {
  Writer w(path);
  w.magic("DIRR");
  w.u32(kVersion);
  w.f64(rate);
  w.f64(ir.t_er);
  w.u64(ir.entries.size());
  for (const auto& e : ir.entries) {
    write_vec3(w, e.direction);
    w.u64(e.kernel.samples.size());
    w.f64s(e.kernel.samples);
  }
  w.u64(ir.lr_tail.samples.size());
  w.f64s(ir.lr_tail.samples);
}

irsynth::DirectionalIr read_directional_ir(const std::string& path,
                                           double* rate_out) {
  Reader r(path);
  r.expect_magic("DIRR");
  if (r.u32() != kVersion) throw InputError("unsupported DIRR version");
  const double rate = r.f64();
  irsynth::DirectionalIr ir;
  ir.t_er = r.f64();
  const auto count = r.u64();
  ir.entries.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    irsynth::DirectionalIrEntry e;
    e.direction = read_vec3(r);
    e.kernel.rate = rate;
    e.kernel.samples = r.f64s(r.u64());
    ir.entries.push_back(std::move(e));
  }
  ir.lr_tail.rate = rate;
  ir.lr_tail.samples = r.f64s(r.u64());
  if (rate_out) *rate_out = rate;
  return ir;
}

}  // namespace roomtone::serialize
