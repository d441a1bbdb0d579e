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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "roomtone/scene.hpp"

namespace roomtone {

/// One traced sound path from source to listener.
///
/// `direction` points from the listener toward where the sound arrives from
/// (for the direct path: toward the source). `air_factor` is the per-band
/// distance attenuation along the whole path: inverse-square spreading times
/// molecular air absorption, so it depends on path length only, never on
/// materials. `band_energy` = air_factor * product of surface reflectances.
struct PathRecord {
  double arrival_time = 0.0;
  Vec3 direction;
  std::vector<double> band_energy;
  std::vector<uint32_t> material_seq;
  std::vector<double> air_factor;

  int bounce_count() const { return static_cast<int>(material_seq.size()); }
};

struct PathSet {
  std::vector<PathRecord> paths;
  Vec3 source;
  Vec3 listener;
  uint64_t seed = 0;
  uint64_t ray_budget = 0;
  int band_count = 0;
};

struct TraceOptions {
  double receiver_radius = 0.25;  // meters
  int threads = 0;                // 0 = hardware concurrency
  int max_bounces = 256;
  double roulette_floor = 1e-6;   // cumulative reflectance cutoff
  bool include_spreading = true;  // 1/(4 pi d^2) in air_factor
  bool include_air = true;        // molecular absorption in air_factor
};

namespace air {

/// Energy attenuation coefficient (nepers per meter) at 20 C, 50% RH,
/// 1 atm, from the standard two-relaxation air absorption model.
double energy_coefficient(double frequency_hz);

/// exp(-alpha * distance); equals 1 at distance 0 and decreases with
/// frequency for any positive distance.
double attenuation(double distance_m, double frequency_hz);

}  // namespace air

namespace tracer {

/// Per-band 1/(4 pi d^2) spreading times air absorption.
std::vector<double> distance_factor(double length_m,
                                    std::span<const double> band_centers,
                                    const TraceOptions& opts = {});

/// Builds a PathRecord for an explicit polyline source -> bounces -> listener
/// with the given material sequence. Energies use the scene's current
/// material table.
PathRecord make_record(const Scene& scene, std::span<const Vec3> vertices,
                       std::span<const uint32_t> material_seq,
                       const TraceOptions& opts = {});

/// Direct connection if no surface cuts the open segment.
std::optional<PathRecord> direct_path(const Scene& scene, const Vec3& source,
                                      const Vec3& listener,
                                      const TraceOptions& opts = {});

/// Eq.-style per-path energy under an explicit reflectance table:
/// air_factor * product of table[m][band] over the bounce sequence.
std::vector<double> path_energy(
    const PathRecord& path,
    const std::vector<std::vector<double>>& reflectance_table);

/// Deposit polarity for a reflected path: a stable +-1 hash of its arrival
/// time and direction. Decorrelates overlapping kernels so a dense sum of
/// deposits carries the sum of their energies instead of coherent pile-up.
/// The direct path keeps +1.
double path_polarity(const PathRecord& path);

/// Stochastic forward trace. Deterministic for fixed (scene, endpoints,
/// budget, seed) regardless of thread count; paths are sorted by arrival
/// time. Every returned path satisfies arrival_time <= max_time.
PathSet trace_paths(const Scene& scene, const Vec3& source,
                    const Vec3& listener, uint64_t ray_budget, double max_time,
                    uint64_t seed, const TraceOptions& opts = {});

}  // namespace tracer

}  // namespace roomtone
