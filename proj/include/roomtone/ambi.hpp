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

#include <vector>

#include "roomtone/irsynth.hpp"
#include "roomtone/scene.hpp"

namespace roomtone::ambi {

struct SphericalDirection {
  double azimuth = 0.0;    // radians in [0, 2pi)
  double elevation = 0.0;  // radians in [-pi/2, pi/2]
};

SphericalDirection direction_of(const Vec3& v);

/// ACN channel index for (n, m).
inline int acn_index(int n, int m) { return n * n + n + m; }

/// Real spherical harmonic. First order follows the W/X/Y/Z basis with
/// W = 1/sqrt(2), X = cos(az) cos(el), Y = sin(az) cos(el), Z = sin(el);
/// orders >= 2 are SN3D-normalized.
double real_sh(int n, int m, const SphericalDirection& dir);

/// Spherical-harmonic-domain multichannel audio, ACN channel order.
struct AmbisonicBuffer {
  int order = 1;
  double rate = kDefaultRate;
  std::vector<std::vector<double>> channels;  // (order+1)^2, equal lengths

  static AmbisonicBuffer zeros(int order, double rate, std::size_t length);
  int channel_count() const { return (order + 1) * (order + 1); }
};

/// Encodes directional early entries: for every entry the dry signal is
/// convolved with its kernel and accumulated into each channel with gain
/// Y_n^m(direction). Linear in both the dry signal and the entry list.
AmbisonicBuffer encode_er(const Signal& dry,
                          const std::vector<irsynth::DirectionalIrEntry>& entries,
                          int order);

/// Adds the isotropic late part: W += (1/sqrt(2)) * (dry conv tail); every
/// other channel is untouched.
void encode_lr(const Signal& dry, const Signal& tail, AmbisonicBuffer& buffer);

/// Test probe: sum of Y_n^m(dir) * channel_nm.
Signal decode_to_direction(const AmbisonicBuffer& buffer,
                           const SphericalDirection& dir);

/// Re-normalizes first-order channels from the internal basis (W = 1/sqrt 2)
/// to SN3D/AmbiX (W = 1).
void to_sn3d(AmbisonicBuffer& buffer);

/// Scales all channels down when the peak exceeds `limit` and returns the
/// applied gain (1.0 when nothing was done).
double limit_peak(AmbisonicBuffer& buffer, double limit = 0.99);

struct RenderOptions {
  Vec3 source;
  uint64_t ray_budget = 20000;
  uint64_t seed = 0;
  int order = 1;
  double spacing = 0.5;          // meters between listener samples
  double crossfade = 0.050;      // seconds
  double tail_window = 0.010;    // seconds, lr_tail energy match
  TraceOptions trace;
  std::optional<irsynth::ModulationCurve> modulation;
};

/// Moving-listener render: positions sampled every `spacing` meters of arc
/// length along the trajectory, one directional IR per position, segments
/// crossfaded with a cosine window (adjacent weights sum to one, so equal
/// IRs reproduce the single-position result exactly). Channels are encoded
/// in the world frame; orientation is metadata for the player.
AmbisonicBuffer render_trajectory(const Signal& dry,
                                  const Trajectory& trajectory,
                                  const Scene& scene,
                                  const ImpulseResponse& measured_ir,
                                  double t_er, const RenderOptions& opts);

/// Arc-length resampling of a trajectory; exposed for tests and diagnostics.
std::vector<TrajectorySample> sample_positions(const Trajectory& trajectory,
                                               double spacing);

/// Crossfade weight of segment k at time t, fading across each boundary.
/// Adjacent weights sum to exactly one, so segments with equal IRs
/// reproduce the unsegmented render.
double crossfade_weight(double t, std::size_t segment,
                        const std::vector<double>& boundaries, double fade);

}  // namespace roomtone::ambi
