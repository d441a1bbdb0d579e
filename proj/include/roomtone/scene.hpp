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
#include <string>
#include <vector>

#include "roomtone/core.hpp"

namespace roomtone {

/// Per-octave-band energy reflection coefficients: the fraction of incident
/// energy retained at each bounce, in [0, 1].
struct Material {
  std::string name;
  std::vector<double> reflectance;
};

/// Planar convex polygon with a material index into the scene table.
struct Surface {
  std::vector<Vec3> polygon;
  int material_index = 0;

  Vec3 normal() const;  // unit normal from the vertex winding
};

struct Scene {
  std::vector<Surface> surfaces;
  std::vector<Material> materials;
  double speed_of_sound = kDefaultSpeedOfSound;
  std::vector<double> band_centers = default_band_centers();
  double scattering = 0.3;  // probability of a diffuse bounce

  int band_count() const { return static_cast<int>(band_centers.size()); }

  /// Reflectance table indexed [material][band].
  std::vector<std::vector<double>> reflectance_table() const;

  /// Axis-aligned bounds over all surface vertices (nullopt if no surfaces).
  std::optional<std::pair<Vec3, Vec3>> bounds() const;
};

struct TrajectorySample {
  double t = 0.0;
  Vec3 position;
  Quat orientation;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
};

/// Throws InputError naming the offending surface/material on any
/// invariant violation.
void validate_scene(const Scene& scene);

Scene load_scene(const std::string& path);
Scene parse_scene(const std::string& json_text);
std::string write_scene(const Scene& scene);
void save_scene(const Scene& scene, const std::string& path);

Trajectory load_trajectory(const std::string& path);
Trajectory parse_trajectory(const std::string& json_text);
std::string write_trajectory(const Trajectory& t);

struct CalibrationResult {
  Scene scene;
  double scale = 1.0;
};

/// Uniformly rescales the room so the direct source->listener arrival
/// matches t_first: scale = (c * t_first) / |source - listener|. The same
/// scale must be applied to any positions used with the returned scene;
/// the scaled endpoints are returned for convenience.
struct CalibratedEndpoints {
  Scene scene;
  Vec3 source;
  Vec3 listener;
  double scale = 1.0;
};

CalibratedEndpoints calibrate_scale(const Scene& scene, const Vec3& source,
                                    const Vec3& listener, double t_first);

}  // namespace roomtone
