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

#include "roomtone/matopt.hpp"

#include <cmath>

#include "doctest.h"
#include "roomtone/dsp.hpp"
#include "roomtone/rng.hpp"
#include "support.hpp"

using namespace roomtone;
using roomtone::testing::make_shoebox;
using roomtone::testing::uniform_material;

namespace {

constexpr double kLn10 = 2.302585092994046;

// Hand-built problem: one band, arbitrary paths.
struct TinyProblem {
  PathSet paths;
  sweep::DecayModel decay;

  matopt::OptProblem problem(int n_materials) {
    return matopt::make_problem(paths, decay, n_materials);
  }
};

TinyProblem tiny_problem(int bands = 1) {
  TinyProblem tp;
  tp.paths.band_count = bands;

  PathRecord direct;
  direct.arrival_time = 0.01;
  direct.air_factor.assign(bands, 1.0);
  direct.band_energy.assign(bands, 1.0);
  tp.paths.paths.push_back(direct);

  tp.decay.t0 = 0.01;
  for (int b = 0; b < bands; ++b) tp.decay.bands.push_back({100.0, 1.0, 20.0});
  return tp;
}

void add_path(TinyProblem& tp, double t, std::vector<uint32_t> mats,
              double beta) {
  const int bands = tp.paths.band_count;
  PathRecord p;
  p.arrival_time = t;
  p.material_seq = std::move(mats);
  p.air_factor.assign(bands, beta);
  p.band_energy.assign(bands, 0.0);
  tp.paths.paths.push_back(std::move(p));
}

// Random instance in the acceptance shape: materials, bands, paths.
matopt::OptProblem random_problem(TinyProblem& tp, Rng& rng, int n_materials,
                                  int bands, int n_paths) {
  tp = tiny_problem(bands);
  for (int b = 0; b < bands; ++b)
    tp.decay.bands[static_cast<std::size_t>(b)] = {100.0, 1.0,
                                                   rng.uniform(5.0, 40.0)};
  for (int j = 0; j < n_paths; ++j) {
    const double t = rng.uniform(0.012, 0.3);
    const int n_bounce = 1 + static_cast<int>(rng.uniform(0.0, 8.0));
    std::vector<uint32_t> mats;
    for (int k = 0; k < n_bounce; ++k)
      mats.push_back(static_cast<uint32_t>(
          rng.uniform(0.0, static_cast<double>(n_materials))));
    add_path(tp, t, std::move(mats), std::pow(10.0, rng.uniform(-4.0, 0.0)));
  }
  return tp.problem(n_materials);
}

}  // namespace

TEST_CASE("objective is zero when energies match the decay exactly") {
  TinyProblem tp = tiny_problem();
  const double p_star = 0.7;
  const double gamma = tp.decay.bands[0].rate;

  // Choose beta so that e_j(p*)/e0 equals h(t_j)/h(t0) exactly.
  for (double t : {0.03, 0.07, 0.15}) {
    const int n = 3;
    const double target = std::exp(-gamma * (t - tp.decay.t0));
    const double beta = target / std::pow(p_star, n);
    add_path(tp, t, {0, 0, 0}, beta);
  }
  auto problem = tp.problem(1);
  const double p[] = {p_star};
  CHECK(matopt::objective(p, problem, 0) ==
        doctest::Approx(0.0).epsilon(1e-20));

  // Stationary at the optimum.
  const auto g = matopt::gradient(p, problem, 0);
  CHECK(std::abs(g[0]) < 1e-10);
}

TEST_CASE("single path closed form") {
  TinyProblem tp = tiny_problem();
  const int n_bounce = 4;
  const double beta = 0.2;
  const double t = 0.05;
  add_path(tp, t, {0, 0, 0, 0}, beta);
  auto problem = tp.problem(1);

  const double p_val = 0.55;
  const double p[] = {p_val};
  // J = [N log10 p + log10(beta/e0) + gamma (t - t0)/ln10]^2 by hand.
  const double r = n_bounce * std::log10(p_val) + std::log10(beta) +
                   tp.decay.bands[0].rate * (t - tp.decay.t0) / kLn10;
  CHECK(matopt::objective(p, problem, 0) ==
        doctest::Approx(r * r).epsilon(1e-12));
}

TEST_CASE("doubling all energies and e0 leaves J unchanged") {
  Rng rng(3);
  TinyProblem tp;
  auto problem = random_problem(tp, rng, 2, 1, 50);
  const double p[] = {0.6, 0.35};
  const double j1 = matopt::objective(p, problem, 0);

  for (auto& path : tp.paths.paths)
    for (auto& v : path.air_factor) v *= 2.0;
  for (auto& path : tp.paths.paths)
    for (auto& v : path.band_energy) v *= 2.0;
  auto doubled = tp.problem(2);
  const double j2 = matopt::objective(p, doubled, 0);
  CHECK(j1 == doctest::Approx(j2).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(17);
  for (int instance = 0; instance < 5; ++instance) {
    TinyProblem tp;
    auto problem = random_problem(tp, rng, 3, 1, 120);
    std::vector<double> p = {rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9),
                             rng.uniform(0.2, 0.9)};
    const auto g = matopt::gradient(p, problem, 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double h = 1e-6;
      auto lo = p, hi = p;
      lo[i] -= h;
      hi[i] += h;
      const double fd = (matopt::objective(hi, problem, 0) -
                         matopt::objective(lo, problem, 0)) /
                        (2.0 * h);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("material absent from all paths has zero partial") {
  TinyProblem tp = tiny_problem();
  add_path(tp, 0.05, {0, 0}, 0.3);
  add_path(tp, 0.09, {0}, 0.2);
  auto problem = tp.problem(2);  // material 1 unused
  const double p[] = {0.5, 0.5};
  const auto g = matopt::gradient(p, problem, 0);
  CHECK(g[1] == 0.0);
  CHECK(g[0] != 0.0);
}

TEST_CASE("nonpositive reflectance is rejected") {
  TinyProblem tp = tiny_problem();
  add_path(tp, 0.05, {0}, 0.3);
  auto problem = tp.problem(1);
  const double p[] = {0.0};
  CHECK_THROWS_AS(matopt::objective(p, problem, 0), InputError);
}

TEST_CASE("synthetic shoebox recovery within 0.05 per band") {
  // Known reflectances produce the paths; the decay model is regressed from
  // those same energies; the optimizer must find its way back from 0.5.
  Material m;
  m.name = "room";
  m.reflectance = {0.92, 0.88, 0.85, 0.80, 0.75, 0.70, 0.72, 0.78};
  Scene box = make_shoebox(4, 6, 3, {m});
  const auto paths =
      tracer::trace_paths(box, {1.0, 2.0, 1.5}, {3.0, 4.5, 1.2}, 30000, 0.35,
                          2024);
  REQUIRE(paths.paths.size() > 2000);
  const auto decay =
      roomtone::testing::synthetic_decay_from_paths(paths, box.band_centers);

  auto problem = matopt::make_problem(paths, decay, 1);
  const auto report = matopt::optimize_materials(problem);
  REQUIRE(report.bands.size() == 8);
  int hits = 0;
  for (std::size_t b = 0; b < 8; ++b) {
    const auto& band = report.bands[b];
    if (std::abs(band.p[0] - m.reflectance[b]) <= 0.05) ++hits;
    CHECK(band.j_final <= band.j_initial);
  }
  CHECK(hits >= 7);

  // The simulated IR rebuilt from the fitted materials decays like the
  // measured one under the identical fit protocol, band by band.
  const auto measured = matopt::simulate_ir_from_paths(
      paths, box.reflectance_table(), 48000.0, box.band_centers);
  const auto sim = matopt::simulate_ir_from_paths(
      paths, report.reflectance_table(), 48000.0, box.band_centers);
  const auto target_fit = sweep::fit_decay_model(measured, box.band_centers);
  const auto sim_fit = sweep::fit_decay_model(sim, box.band_centers);
  for (std::size_t b = 0; b < 8; ++b)
    CHECK(sim_fit.bands[b].rate ==
          doctest::Approx(target_fit.bands[b].rate).epsilon(0.10));
}

TEST_CASE("starting at the optimum terminates immediately") {
  TinyProblem tp = tiny_problem();
  const double p_star = 0.42;
  const double gamma = tp.decay.bands[0].rate;
  for (double t : {0.02, 0.05, 0.11, 0.19}) {
    const int n = 2;
    const double beta =
        std::exp(-gamma * (t - tp.decay.t0)) / std::pow(p_star, n);
    add_path(tp, t, {0, 0}, beta);
  }
  auto problem = tp.problem(1);
  matopt::OptimizeOptions opts;
  opts.init = p_star;
  const auto report = matopt::optimize_materials(problem, opts);
  CHECK(report.bands[0].iterations <= 2);
  CHECK(report.bands[0].p[0] == doctest::Approx(p_star).epsilon(1e-9));
}

TEST_CASE("permuting bands permutes results identically") {
  Rng rng(23);
  TinyProblem tp;
  auto problem = random_problem(tp, rng, 2, 4, 80);
  // Give each band distinct data by varying air factors per band.
  for (auto& path : tp.paths.paths)
    for (std::size_t b = 0; b < path.air_factor.size(); ++b)
      path.air_factor[b] *= 1.0 / (1.0 + static_cast<double>(b));
  auto base_problem = tp.problem(2);
  matopt::OptimizeOptions opts;
  opts.threads = 1;
  const auto base = matopt::optimize_materials(base_problem, opts);

  // Reverse the band order everywhere.
  TinyProblem rev = tp;
  for (auto& path : rev.paths.paths) {
    std::reverse(path.air_factor.begin(), path.air_factor.end());
    std::reverse(path.band_energy.begin(), path.band_energy.end());
  }
  std::reverse(rev.decay.bands.begin(), rev.decay.bands.end());
  auto rev_problem = rev.problem(2);
  const auto permuted = matopt::optimize_materials(rev_problem, opts);

  for (std::size_t b = 0; b < 4; ++b) {
    const auto& a = base.bands[b];
    const auto& z = permuted.bands[3 - b];
    CHECK(a.p[0] == z.p[0]);
    CHECK(a.p[1] == z.p[1]);
    CHECK(a.j_final == z.j_final);
  }
}

TEST_CASE("simulate_ir_from_paths") {
  const auto centers = default_band_centers();

  SUBCASE("single direct path deposits once at its arrival") {
    PathSet set;
    set.band_count = 8;
    PathRecord direct;
    direct.arrival_time = 0.01;
    direct.air_factor.assign(8, 0.125);
    direct.band_energy.assign(8, 0.125);
    set.paths.push_back(direct);

    const auto ir = matopt::simulate_ir_from_paths(set, {}, 48000.0, centers);
    CHECK(ir.first_arrival == 0.01);
    const std::size_t at = 480;
    for (std::size_t i = 0; i < at; ++i) CHECK(ir.samples[i] == 0.0);
    CHECK(dsp::total_energy(ir.samples) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("zero-energy paths stay silent") {
    PathSet set;
    set.band_count = 8;
    PathRecord p;
    p.arrival_time = 0.02;
    p.air_factor.assign(8, 0.0);
    p.band_energy.assign(8, 0.0);
    set.paths.push_back(p);
    const auto ir = matopt::simulate_ir_from_paths(set, {}, 48000.0, centers);
    for (double v : ir.samples) CHECK(v == 0.0);
  }
}
