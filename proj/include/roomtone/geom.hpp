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

#include <limits>
#include <optional>

#include "roomtone/core.hpp"

namespace roomtone {
struct Surface;
struct Scene;
}  // namespace roomtone

namespace roomtone::geom {

struct Hit {
  double t = 0.0;      // ray parameter (distance for unit directions)
  int surface = -1;
  Vec3 point;
  Vec3 normal;         // geometric normal of the surface plane
};

/// Ray/convex-polygon intersection; accepts hits with t in (t_min, t_max).
std::optional<double> intersect_polygon(const Surface& s, const Vec3& origin,
                                        const Vec3& dir, double t_min,
                                        double t_max);

/// Nearest surface hit in the scene along origin + t*dir.
std::optional<Hit> intersect_scene(const Scene& scene, const Vec3& origin,
                                   const Vec3& dir, double t_min,
                                   double t_max);

/// True when any surface cuts the open segment (a, b).
bool segment_occluded(const Scene& scene, const Vec3& a, const Vec3& b);

}  // namespace roomtone::geom
