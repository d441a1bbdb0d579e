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

#include "roomtone/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "roomtone/geom.hpp"

namespace roomtone {

using nlohmann::json;

Vec3 Surface::normal() const {
  // Newell's method: robust for any planar polygon.
  Vec3 n{};
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec3& a = polygon[i];
    const Vec3& b = polygon[(i + 1) % polygon.size()];
    n.x += (a.y - b.y) * (a.z + b.z);
    n.y += (a.z - b.z) * (a.x + b.x);
    n.z += (a.x - b.x) * (a.y + b.y);
  }
  return normalized(n);
}

std::vector<std::vector<double>> Scene::reflectance_table() const {
  std::vector<std::vector<double>> table;
  table.reserve(materials.size());
  for (const auto& m : materials) table.push_back(m.reflectance);
  return table;
}

std::optional<std::pair<Vec3, Vec3>> Scene::bounds() const {
  if (surfaces.empty()) return std::nullopt;
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& s : surfaces)
    for (const auto& v : s.polygon) {
      lo.x = std::min(lo.x, v.x);
      lo.y = std::min(lo.y, v.y);
      lo.z = std::min(lo.z, v.z);
      hi.x = std::max(hi.x, v.x);
      hi.y = std::max(hi.y, v.y);
      hi.z = std::max(hi.z, v.z);
    }
  return std::make_pair(lo, hi);
}

namespace {

constexpr double kPlanarTolerance = 1e-6;  // meters

void validate_surface(const Surface& s, std::size_t index,
                      std::size_t material_count) {
  if (s.polygon.size() < 3)
    throw InputError("surface " + std::to_string(index) +
                     ": fewer than 3 vertices");
  if (s.material_index < 0 ||
      static_cast<std::size_t>(s.material_index) >= material_count)
    throw InputError("surface " + std::to_string(index) +
                     ": material index " + std::to_string(s.material_index) +
                     " out of range");
  const Vec3 n = s.normal();
  if (norm(n) < 0.5)
    throw InputError("surface " + std::to_string(index) +
                     ": degenerate polygon (no well-defined normal)");
  const double d = dot(n, s.polygon[0]);
  for (std::size_t i = 0; i < s.polygon.size(); ++i)
    if (std::abs(dot(n, s.polygon[i]) - d) > kPlanarTolerance)
      throw InputError("surface " + std::to_string(index) + ": vertex " +
                       std::to_string(i) + " off plane by more than 1e-6 m");
  // Convexity: all edge turns agree with the normal.
  const std::size_t nv = s.polygon.size();
  for (std::size_t i = 0; i < nv; ++i) {
    const Vec3 e0 = s.polygon[(i + 1) % nv] - s.polygon[i];
    const Vec3 e1 = s.polygon[(i + 2) % nv] - s.polygon[(i + 1) % nv];
    if (dot(cross(e0, e1), n) < -kPlanarTolerance)
      throw InputError("surface " + std::to_string(index) +
                       ": polygon is not convex at vertex " +
                       std::to_string((i + 1) % nv));
  }
}

}  // namespace

void validate_scene(const Scene& scene) {
  if (scene.speed_of_sound <= 0.0)
    throw InputError("speed_of_sound must be positive");
  if (scene.band_centers.empty())
    throw InputError("band_centers must be nonempty");
  for (std::size_t i = 1; i < scene.band_centers.size(); ++i)
    if (scene.band_centers[i] <= scene.band_centers[i - 1])
      throw InputError("band_centers must be strictly increasing at index " +
                       std::to_string(i));
  if (scene.scattering < 0.0 || scene.scattering > 1.0)
    throw InputError("scattering must lie in [0,1]");

  const std::size_t nb = scene.band_centers.size();
  for (std::size_t m = 0; m < scene.materials.size(); ++m) {
    const auto& mat = scene.materials[m];
    if (mat.reflectance.size() != nb)
      throw InputError("material " + std::to_string(m) + " (" + mat.name +
                       "): expected " + std::to_string(nb) +
                       " reflectance bands, got " +
                       std::to_string(mat.reflectance.size()));
    for (std::size_t b = 0; b < mat.reflectance.size(); ++b)
      if (!(mat.reflectance[b] >= 0.0 && mat.reflectance[b] <= 1.0))
        throw InputError("material " + std::to_string(m) + " (" + mat.name +
                         "): reflectance out of [0,1] in band " +
                         std::to_string(b));
  }
  for (std::size_t i = 0; i < scene.surfaces.size(); ++i)
    validate_surface(scene.surfaces[i], i, scene.materials.size());
}

Scene parse_scene(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("scene parse failure: ") + e.what());
  }

  Scene scene;
  try {
    if (j.contains("speed_of_sound"))
      scene.speed_of_sound = j["speed_of_sound"].get<double>();
    if (j.contains("band_centers"))
      scene.band_centers = j["band_centers"].get<std::vector<double>>();
    if (j.contains("scattering"))
      scene.scattering = j["scattering"].get<double>();
    for (const auto& jm : j.value("materials", json::array())) {
      Material m;
      m.name = jm.value("name", "");
      m.reflectance = jm.at("reflectance").get<std::vector<double>>();
      scene.materials.push_back(std::move(m));
    }
    for (const auto& js : j.value("surfaces", json::array())) {
      Surface s;
      for (const auto& jv : js.at("vertices"))
        s.polygon.push_back(
            {jv.at(0).get<double>(), jv.at(1).get<double>(),
             jv.at(2).get<double>()});
      s.material_index = js.at("material").get<int>();
      scene.surfaces.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("scene parse failure: ") + e.what());
  }

  validate_scene(scene);
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open scene file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scene(ss.str());
}

std::string write_scene(const Scene& scene) {
  json j;
  j["speed_of_sound"] = scene.speed_of_sound;
  j["band_centers"] = scene.band_centers;
  j["scattering"] = scene.scattering;
  j["materials"] = json::array();
  for (const auto& m : scene.materials)
    j["materials"].push_back({{"name", m.name}, {"reflectance", m.reflectance}});
  j["surfaces"] = json::array();
  for (const auto& s : scene.surfaces) {
    json verts = json::array();
    for (const auto& v : s.polygon) verts.push_back({v.x, v.y, v.z});
    j["surfaces"].push_back(
        {{"vertices", verts}, {"material", s.material_index}});
  }
  return j.dump(2);
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write scene file: " + path);
  f << write_scene(scene) << "\n";
}

Trajectory parse_trajectory(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("trajectory parse failure: ") + e.what());
  }
  Trajectory t;
  try {
    for (const auto& js : j) {
      TrajectorySample s;
      s.t = js.at("t").get<double>();
      s.position = {js.at("pos").at(0).get<double>(),
                    js.at("pos").at(1).get<double>(),
                    js.at("pos").at(2).get<double>()};
      const auto& q = js.at("quat");
      s.orientation = {q.at(0).get<double>(), q.at(1).get<double>(),
                       q.at(2).get<double>(), q.at(3).get<double>()};
      t.samples.push_back(s);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("trajectory parse failure: ") + e.what());
  }

  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    if (i > 0 && t.samples[i].t <= t.samples[i - 1].t)
      throw InputError("trajectory times must strictly increase at sample " +
                       std::to_string(i));
    if (std::abs(t.samples[i].orientation.norm() - 1.0) > 1e-6)
      throw InputError("trajectory orientation not normalized at sample " +
                       std::to_string(i));
  }
  return t;
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open trajectory file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_trajectory(ss.str());
}

std::string write_trajectory(const Trajectory& t) {
  json j = json::array();
  for (const auto& s : t.samples)
    j.push_back({{"t", s.t},
                 {"pos", {s.position.x, s.position.y, s.position.z}},
                 {"quat",
                  {s.orientation.w, s.orientation.x, s.orientation.y,
                   s.orientation.z}}});
  return j.dump(2);
}

CalibratedEndpoints calibrate_scale(const Scene& scene, const Vec3& source,
                                    const Vec3& listener, double t_first) {
  if (t_first <= 0.0) throw InputError("calibrate_scale: t_first must be > 0");
  const double dist = norm(listener - source);
  if (dist <= 0.0)
    throw InputError("calibrate_scale: source and listener coincide");
  if (geom::segment_occluded(scene, source, listener))
    throw InputError(
        "calibrate_scale: direct path is occluded; pick a visible pairing");

  const double scale = scene.speed_of_sound * t_first / dist;
  CalibratedEndpoints out;
  out.scene = scene;
  for (auto& s : out.scene.surfaces)
    for (auto& v : s.polygon) v = v * scale;
  out.source = source * scale;
  out.listener = listener * scale;
  out.scale = scale;
  return out;
}

}  // namespace roomtone
