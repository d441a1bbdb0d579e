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

#include <optional>
#include <vector>

#include "roomtone/filters.hpp"
#include "roomtone/tracer.hpp"

namespace roomtone::irsynth {

/// Spectral gain ratio |measured| / |simulated| captured around the direct
/// arrival; compensates room resonances the geometric simulation misses.
/// 128 gains over [0, rate/2) at bin spacing rate/256.
struct ModulationCurve {
  std::vector<double> ratio;
  double rate = kDefaultRate;

  /// Gain at an arbitrary frequency by linear interpolation.
  double gain_at(double hz) const;

  static ModulationCurve identity(double rate);
};

struct DirectionalIrEntry {
  Vec3 direction;
  Signal kernel;  // time-indexed from 0; support starts at the arrival time
};

/// Directional early part plus omnidirectional late tail.
struct DirectionalIr {
  std::vector<DirectionalIrEntry> entries;
  Signal lr_tail;
  double t_er = 0.0;
};

/// Band-shaped kernel for one traced ray: a delayed impulse split by the
/// LR4 crossover bank, each band scaled by sqrt(e_band). Total kernel
/// energy equals the ray's summed band energy (within crossover ripple).
Signal er_ray_ir(const PathRecord& ray, const filters::KernelBank& bank);
Signal er_ray_ir(const PathRecord& ray, double rate,
                 const std::vector<double>& band_centers);

/// Ratio of magnitude spectra in 256-sample windows slid (hop 16) over
/// [t0, t0 + 2*256/rate], averaged. Windows where the simulated side is
/// silent are skipped; bins where |simulated| < 1e-9 * peak contribute 1.
ModulationCurve compute_modulation(const ImpulseResponse& measured,
                                   const ImpulseResponse& simulated,
                                   double t0);

/// Scales the kernel's magnitude spectrum by the curve, preserving phase.
Signal apply_modulation(const Signal& kernel, const ModulationCurve& m);

/// Measured-tail extraction: zero before t_er, scaled measured IR after.
/// The scale matches simulated ray energy to measured energy in the window
/// [t_er - window, t_er]:
///   s = sqrt( sum_{rays in window} sum_bands e / integral of h(t) dt ).
Signal lr_tail(const ImpulseResponse& measured, double t_er,
               const PathSet& paths, double window = 0.010);

/// Two-room late-tail composition over door samples p:
///   a * sum_p ( er_s[p] * lr2 + er_d[p] * lr1 + lr1 * lr2 )
/// where * is convolution. lr1/lr2 are the extracted LR tails of the two
/// rooms' measured IRs; er_s/er_d are simulated ER IRs from the source
/// (room 1) and listener (room 2) to each door sample.
Signal crossroom_lrir(const Signal& lr1, const Signal& lr2,
                      const std::vector<Signal>& er_s_to_door,
                      const std::vector<Signal>& er_d_to_door,
                      double area_per_sample);

struct SynthesisOptions {
  uint64_t ray_budget = 20000;
  uint64_t seed = 0;
  double rate = kDefaultRate;
  double tail_window = 0.010;  // seconds, for the lr_tail energy match
  TraceOptions trace;
  std::optional<ModulationCurve> modulation;
};

/// Full directional IR at one listener position: traced ER rays culled at
/// t_er, per-ray kernels (modulated when a curve is provided), plus the
/// scaled measured tail.
DirectionalIr synthesize_directional_ir(const Scene& scene, const Vec3& source,
                                        const Vec3& listener,
                                        const ImpulseResponse& measured,
                                        double t_er,
                                        const SynthesisOptions& opts);

}  // namespace roomtone::irsynth
