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

#include "roomtone/tracer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <thread>

#include "roomtone/geom.hpp"
#include "roomtone/rng.hpp"

namespace roomtone {

namespace air {

double energy_coefficient(double frequency_hz) {
  // Two-relaxation model (oxygen and nitrogen) at T = 293.15 K, 50% relative
  // humidity, sea-level pressure. At the reference temperature and pressure
  // the usual (T/T0) and (pa/pr) ratio terms are all one.
  constexpr double kT = 293.15;
  constexpr double kTriple = 273.16;
  constexpr double kRelHumidity = 50.0;
  const double c_sat = -6.8346 * std::pow(kTriple / kT, 1.261) + 4.6151;
  const double h = kRelHumidity * std::pow(10.0, c_sat);  // molar % vapor
  const double fr_o = 24.0 + 4.04e4 * h * (0.02 + h) / (0.391 + h);
  const double fr_n = 9.0 + 280.0 * h;
  const double f2 = frequency_hz * frequency_hz;
  const double alpha_db =
      8.686 * f2 *
      (1.84e-11 + 0.01275 * std::exp(-2239.1 / kT) / (fr_o + f2 / fr_o) +
       0.1068 * std::exp(-3352.0 / kT) / (fr_n + f2 / fr_n));
  // dB/m (level) -> nepers/m on energy.
  return alpha_db * std::log(10.0) / 10.0;
}

double attenuation(double distance_m, double frequency_hz) {
  if (distance_m < 0.0) throw InputError("air attenuation: negative distance");
  return std::exp(-energy_coefficient(frequency_hz) * distance_m);
}

}  // namespace air

namespace tracer {

namespace {

Vec3 reflect(const Vec3& d, const Vec3& n) { return d - n * (2.0 * dot(d, n)); }

Vec3 cosine_hemisphere(const Vec3& n, Rng& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double r = std::sqrt(u1);
  const double phi = 2.0 * kPi * u2;
  // Tangent frame around n.
  const Vec3 a = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 t = normalized(cross(a, n));
  const Vec3 b = cross(n, t);
  const double z = std::sqrt(std::max(0.0, 1.0 - u1));
  return normalized(t * (r * std::cos(phi)) + b * (r * std::sin(phi)) + n * z);
}

// Closest-approach hit of a segment [origin, origin + dir*seg_len) against
// the receiver sphere. Returns the length along the segment, or nullopt.
std::optional<double> receiver_hit(const Vec3& origin, const Vec3& dir,
                                   double seg_len, const Vec3& center,
                                   double radius) {
  const double s = dot(center - origin, dir);
  if (s <= 0.0 || s >= seg_len) return std::nullopt;
  if (norm(origin + dir * s - center) > radius) return std::nullopt;
  return s;
}

struct Prefix {
  std::vector<double> reflectance;  // running product per band
  std::vector<uint32_t> materials;
};

}  // namespace

std::vector<double> distance_factor(double length_m,
                                    std::span<const double> band_centers,
                                    const TraceOptions& opts) {
  std::vector<double> out(band_centers.size(), 1.0);
  // Near-field clamp: inside the receiver sphere the inverse-square law
  // stops growing, which keeps a listener crossing the source finite.
  const double d = std::max(length_m, opts.receiver_radius);
  const double spread =
      opts.include_spreading ? 1.0 / (4.0 * kPi * d * d) : 1.0;
  for (std::size_t b = 0; b < band_centers.size(); ++b) {
    double v = spread;
    if (opts.include_air) v *= air::attenuation(length_m, band_centers[b]);
    out[b] = v;
  }
  return out;
}

PathRecord make_record(const Scene& scene, std::span<const Vec3> vertices,
                       std::span<const uint32_t> material_seq,
                       const TraceOptions& opts) {
  if (vertices.size() < 2)
    throw InputError("make_record: need source and listener");
  if (vertices.size() != material_seq.size() + 2)
    throw InputError("make_record: vertex/material count mismatch");

  double length = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i)
    length += norm(vertices[i] - vertices[i - 1]);

  PathRecord rec;
  rec.arrival_time = length / scene.speed_of_sound;
  rec.direction =
      normalized(vertices[vertices.size() - 2] - vertices.back());
  rec.material_seq.assign(material_seq.begin(), material_seq.end());
  rec.air_factor = distance_factor(length, scene.band_centers, opts);
  rec.band_energy = path_energy(rec, scene.reflectance_table());
  return rec;
}

std::optional<PathRecord> direct_path(const Scene& scene, const Vec3& source,
                                      const Vec3& listener,
                                      const TraceOptions& opts) {
  if (geom::segment_occluded(scene, source, listener)) return std::nullopt;
  const Vec3 verts[2] = {source, listener};
  return make_record(scene, verts, {}, opts);
}

double path_polarity(const PathRecord& path) {
  if (path.bounce_count() == 0) return 1.0;
  uint64_t h = std::bit_cast<uint64_t>(path.arrival_time);
  h ^= std::bit_cast<uint64_t>(path.direction.x) * 0x9e3779b97f4a7c15ULL;
  h ^= std::bit_cast<uint64_t>(path.direction.y) * 0xbf58476d1ce4e5b9ULL;
  h ^= std::bit_cast<uint64_t>(path.direction.z) * 0x94d049bb133111ebULL;
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 29;
  return (h & 1u) ? 1.0 : -1.0;
}

std::vector<double> path_energy(
    const PathRecord& path,
    const std::vector<std::vector<double>>& reflectance_table) {
  std::vector<double> e = path.air_factor;
  for (uint32_t m : path.material_seq) {
    if (m >= reflectance_table.size())
      throw InputError("path_energy: material index " + std::to_string(m) +
                       " out of range");
    const auto& refl = reflectance_table[m];
    if (refl.size() != e.size())
      throw InputError("path_energy: band count mismatch");
    for (std::size_t b = 0; b < e.size(); ++b) e[b] *= refl[b];
  }
  return e;
}

namespace {

void trace_one_ray(const Scene& scene, const Vec3& source,
                   const Vec3& listener, double max_time, uint64_t seed,
                   uint64_t ray_index, const TraceOptions& opts,
                   std::vector<PathRecord>& out) {
  Rng rng(seed, ray_index);
  const double c = scene.speed_of_sound;
  const auto table = scene.reflectance_table();
  const std::size_t nb = scene.band_centers.size();

  Vec3 pos = source;
  Vec3 dir = rng.unit_sphere();
  double length_acc = 0.0;
  Prefix prefix;
  prefix.reflectance.assign(nb, 1.0);

  for (int bounce = 0; bounce <= opts.max_bounces; ++bounce) {
    const auto hit =
        geom::intersect_scene(scene, pos, dir, 1e-9, 1e30);
    const double seg_len = hit ? hit->t : 1e30;

    // The deterministic direct path covers the zero-bounce case.
    if (!prefix.materials.empty()) {
      const auto s = receiver_hit(pos, dir, seg_len, listener,
                                  opts.receiver_radius);
      if (s) {
        const double length = length_acc + *s;
        const double t = length / c;
        if (t <= max_time) {
          PathRecord rec;
          rec.arrival_time = t;
          rec.direction = dir * -1.0;
          rec.material_seq = prefix.materials;
          rec.air_factor = distance_factor(length, scene.band_centers, opts);
          rec.band_energy.resize(nb);
          for (std::size_t b = 0; b < nb; ++b)
            rec.band_energy[b] = rec.air_factor[b] * prefix.reflectance[b];
          out.push_back(std::move(rec));
        }
      }
    }

    if (!hit) break;  // escaped the polygon soup
    length_acc += hit->t;
    if (length_acc / c > max_time) break;  // cull: no later arrival can count

    const Surface& surf = scene.surfaces[static_cast<std::size_t>(hit->surface)];
    prefix.materials.push_back(static_cast<uint32_t>(surf.material_index));
    const auto& refl = table[static_cast<std::size_t>(surf.material_index)];
    double w_max = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      prefix.reflectance[b] *= refl[b];
      w_max = std::max(w_max, prefix.reflectance[b]);
    }
    if (w_max < opts.roulette_floor) break;

    Vec3 n = hit->normal;
    if (dot(n, dir) > 0.0) n = n * -1.0;  // face the incoming ray
    dir = rng.uniform() < scene.scattering ? cosine_hemisphere(n, rng)
                                           : normalized(reflect(dir, n));
    pos = hit->point + n * 1e-9;
  }
}

bool record_less(const PathRecord& a, const PathRecord& b) {
  if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
  if (a.material_seq != b.material_seq) return a.material_seq < b.material_seq;
  if (a.direction.x != b.direction.x) return a.direction.x < b.direction.x;
  if (a.direction.y != b.direction.y) return a.direction.y < b.direction.y;
  return a.direction.z < b.direction.z;
}

}  // namespace

PathSet trace_paths(const Scene& scene, const Vec3& source,
                    const Vec3& listener, uint64_t ray_budget, double max_time,
                    uint64_t seed, const TraceOptions& opts) {
  if (ray_budget == 0) throw InputError("trace_paths: ray_budget must be > 0");
  if (max_time <= 0.0) throw InputError("trace_paths: max_time must be > 0");

  if (const auto box = scene.bounds()) {
    const Vec3 lo = box->first - Vec3{10, 10, 10};
    const Vec3 hi = box->second + Vec3{10, 10, 10};
    for (const Vec3* p : {&source, &listener}) {
      if (p->x < lo.x || p->y < lo.y || p->z < lo.z || p->x > hi.x ||
          p->y > hi.y || p->z > hi.z)
        throw InputError(
            "trace_paths: endpoint lies more than 10 m outside the scene "
            "bounds (authoring error?)");
    }
  }

  PathSet set;
  set.source = source;
  set.listener = listener;
  set.seed = seed;
  set.ray_budget = ray_budget;
  set.band_count = scene.band_count();

  if (auto d = direct_path(scene, source, listener, opts);
      d && d->arrival_time <= max_time)
    set.paths.push_back(std::move(*d));

  unsigned n_threads = opts.threads > 0
                           ? static_cast<unsigned>(opts.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(
      n_threads, static_cast<unsigned>(std::max<uint64_t>(1, ray_budget)));

  // Each worker owns a contiguous ray range; per-ray substreams make the
  // result independent of the split.
  std::vector<std::vector<PathRecord>> chunks(n_threads);
  std::vector<std::future<void>> jobs;
  const uint64_t per = (ray_budget + n_threads - 1) / n_threads;
  for (unsigned w = 0; w < n_threads; ++w) {
    const uint64_t begin = static_cast<uint64_t>(w) * per;
    const uint64_t end = std::min(ray_budget, begin + per);
    if (begin >= end) break;
    jobs.push_back(std::async(std::launch::async, [&, w, begin, end] {
      for (uint64_t r = begin; r < end; ++r)
        trace_one_ray(scene, source, listener, max_time, seed, r, opts,
                      chunks[w]);
    }));
  }
  for (auto& j : jobs) j.get();

  for (auto& chunk : chunks)
    for (auto& rec : chunk) set.paths.push_back(std::move(rec));
  std::stable_sort(set.paths.begin(), set.paths.end(), record_less);
  return set;
}

}  // namespace tracer

}  // namespace roomtone
