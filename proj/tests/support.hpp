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

#include <cmath>
#include <vector>

#include "roomtone/rng.hpp"
#include "roomtone/scene.hpp"
#include "roomtone/filters.hpp"
#include "roomtone/sweep.hpp"
#include "roomtone/tracer.hpp"

namespace roomtone::testing {

/// Axis-aligned box room [0,lx]x[0,ly]x[0,lz]. Walls use material 0;
/// floor and ceiling use the last material in the table.
inline Scene make_shoebox(double lx, double ly, double lz,
                          std::vector<Material> materials) {
  Scene scene;
  scene.materials = std::move(materials);
  const int wall = 0;
  const int floor_mat = static_cast<int>(scene.materials.size()) - 1;

  auto quad = [&](Vec3 a, Vec3 b, Vec3 c, Vec3 d, int m) {
    Surface s;
    s.polygon = {a, b, c, d};
    s.material_index = m;
    scene.surfaces.push_back(s);
  };
  // floor (z=0) and ceiling (z=lz)
  quad({0, 0, 0}, {lx, 0, 0}, {lx, ly, 0}, {0, ly, 0}, floor_mat);
  quad({0, 0, lz}, {0, ly, lz}, {lx, ly, lz}, {lx, 0, lz}, floor_mat);
  // walls
  quad({0, 0, 0}, {0, 0, lz}, {lx, 0, lz}, {lx, 0, 0}, wall);
  quad({0, ly, 0}, {lx, ly, 0}, {lx, ly, lz}, {0, ly, lz}, wall);
  quad({0, 0, 0}, {0, ly, 0}, {0, ly, lz}, {0, 0, lz}, wall);
  quad({lx, 0, 0}, {lx, 0, lz}, {lx, ly, lz}, {lx, ly, 0}, wall);
  validate_scene(scene);
  return scene;
}

inline Material uniform_material(const std::string& name, double reflectance,
                                 std::size_t bands = 8) {
  return {name, std::vector<double>(bands, reflectance)};
}

inline double rms_diff(const std::vector<double>& a,
                       const std::vector<double>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double va = i < a.size() ? a[i] : 0.0;
    const double vb = i < b.size() ? b[i] : 0.0;
    acc += (va - vb) * (va - vb);
  }
  return std::sqrt(acc / static_cast<double>(n));
}

inline double db(double ratio) { return 10.0 * std::log10(ratio); }

/// Decay model regressed from a traced set's own per-path energies.
/// The objective compares e_j/e0 against h(t_j)/h(t0), i.e. it pins the
/// decay curve through the direct arrival (t0, e0); the self-consistent
/// oracle therefore anchors the per-band regression at that point and
/// fits only the slope.
inline sweep::DecayModel synthetic_decay_from_paths(
    const PathSet& paths, const std::vector<double>& band_centers) {
  sweep::DecayModel model;
  const PathRecord* direct = nullptr;
  for (const auto& p : paths.paths)
    if (p.bounce_count() == 0) direct = &p;
  if (!direct) throw InputError("synthetic decay needs the direct path");
  model.t0 = direct->arrival_time;

  for (std::size_t b = 0; b < band_centers.size(); ++b) {
    const double e0 = direct->band_energy[b];
    double num = 0, den = 0;
    for (const auto& p : paths.paths) {
      if (p.bounce_count() == 0) continue;
      const double e = p.band_energy[b];
      if (e <= 0.0) continue;
      const double dt = p.arrival_time - model.t0;
      num += dt * (std::log(e0) - std::log(e));
      den += dt * dt;
    }
    const double gamma = num / den;
    model.bands.push_back(
        {band_centers[b], e0 * std::exp(gamma * model.t0), gamma});
  }
  return model;
}

/// Synthetic measured IR with clean exponential per-band decays: gated
/// band-filtered noise under A_b exp(-gamma_b t) energy envelopes, plus a
/// direct spike at t0. The standard synthetic reverb fixture; real rooms
/// decay this way, so production decay fits recover the model exactly.
inline ImpulseResponse make_noise_ir(const sweep::DecayModel& model,
                                     const std::vector<double>& band_centers,
                                     double duration, double rate,
                                     uint64_t seed) {
  const auto n = static_cast<std::size_t>(duration * rate);
  const auto onset = static_cast<std::size_t>(model.t0 * rate);
  ImpulseResponse ir;
  ir.rate = rate;
  ir.first_arrival = model.t0;
  ir.samples.assign(n, 0.0);

  for (std::size_t b = 0; b < band_centers.size(); ++b) {
    Rng rng(seed, b);
    std::vector<double> noise(n);
    for (auto& v : noise) v = rng.gaussian();
    const double lo = band_centers[b] / std::sqrt(2.0);
    const double hi = std::min(band_centers[b] * std::sqrt(2.0), 0.49 * rate);
    const auto sos = filters::butter_bandpass4(lo, hi, rate);
    noise = filters::filtfilt(sos, noise);
    // Unit variance in the band, then the model's energy envelope.
    double var = 0.0;
    for (double v : noise) var += v * v;
    var /= static_cast<double>(n);
    const double g = 1.0 / std::sqrt(std::max(var, 1e-300));
    const auto& band = model.bands[b];
    for (std::size_t i = onset; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      ir.samples[i] += g * noise[i] * std::sqrt(band.amplitude) *
                       std::exp(-0.5 * band.rate * t);
    }
  }
  // Direct spike so onset detection locks to t0.
  double rms = 0.0;
  for (std::size_t i = onset; i < std::min(n, onset + 100); ++i)
    rms += ir.samples[i] * ir.samples[i];
  rms = std::sqrt(rms / 100.0);
  ir.samples[onset] += 4.0 * rms;
  return ir;
}

}  // namespace roomtone::testing
