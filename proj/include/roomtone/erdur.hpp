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
#include <span>
#include <vector>

#include "roomtone/tracer.hpp"

namespace roomtone::erdur {

inline constexpr int kZenithBins = 18;
inline constexpr int kAzimuthBins = 36;

/// Uniform-sphere CDF with respect to zenith angle, evaluated at the given
/// edges in [0, pi]: P(phi) = (1 - cos phi) / 2.
std::vector<double> expected_zenith_cdf(std::span<const double> edges);

/// L-infinity distance between two CDF vectors of equal length.
double ks_distance(std::span<const double> empirical,
                   std::span<const double> expected);

struct WindowDistances {
  double start = 0.0;
  double d_zenith = 1.0;
  double d_azimuth = 1.0;
  std::size_t sample_count = 0;
};

struct ErResult {
  double t_er = 0.0;
  int pass_window_index = -1;
  std::vector<WindowDistances> windows;
};

/// Energy-weighted KS distances of the arrival-direction distribution inside
/// [start, start + window) against the isotropic expectation. Windows with
/// no rays report distance 1 in both coordinates.
WindowDistances window_distances(const PathSet& paths, double start,
                                 double window);

/// Slides a window (hop = window/2) from the first arrival and returns the
/// start of the first window where both KS distances pass the threshold;
/// nullopt when nothing within the horizon passes.
std::optional<ErResult> find_er_duration(const PathSet& paths,
                                         double window = 0.010,
                                         double threshold = 0.15,
                                         double horizon = 1.0);

}  // namespace roomtone::erdur
