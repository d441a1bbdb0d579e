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

#include "roomtone/geom.hpp"

#include <cmath>

#include "roomtone/scene.hpp"

namespace roomtone::geom {

std::optional<double> intersect_polygon(const Surface& s, const Vec3& origin,
                                        const Vec3& dir, double t_min,
                                        double t_max) {
  const Vec3 n = s.normal();
  const double denom = dot(n, dir);
  if (std::abs(denom) < 1e-12) return std::nullopt;  // parallel
  const double t = dot(n, s.polygon[0] - origin) / denom;
  if (t <= t_min || t >= t_max) return std::nullopt;

  const Vec3 p = origin + dir * t;
  const std::size_t nv = s.polygon.size();
  // Inside test for a convex polygon: p on the inner side of every edge.
  for (std::size_t i = 0; i < nv; ++i) {
    const Vec3 e = s.polygon[(i + 1) % nv] - s.polygon[i];
    if (dot(cross(e, p - s.polygon[i]), n) < -1e-12) return std::nullopt;
  }
  return t;
}

std::optional<Hit> intersect_scene(const Scene& scene, const Vec3& origin,
                                   const Vec3& dir, double t_min,
                                   double t_max) {
  std::optional<Hit> best;
  double closest = t_max;
  for (std::size_t i = 0; i < scene.surfaces.size(); ++i) {
    const auto t = intersect_polygon(scene.surfaces[i], origin, dir, t_min,
                                     closest);
    if (!t) continue;
    closest = *t;
    Hit h;
    h.t = *t;
    h.surface = static_cast<int>(i);
    h.point = origin + dir * *t;
    h.normal = scene.surfaces[i].normal();
    best = h;
  }
  return best;
}

bool segment_occluded(const Scene& scene, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len = norm(d);
  if (len <= 0.0) return false;
  const Vec3 dir = d / len;
  // Open segment: surfaces touching either endpoint do not occlude.
  return intersect_scene(scene, a, dir, 1e-9 * std::max(1.0, len),
                         len * (1.0 - 1e-12))
      .has_value();
}

}  // namespace roomtone::geom
