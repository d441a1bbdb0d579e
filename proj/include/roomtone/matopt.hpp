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

#include <span>
#include <vector>

#include "roomtone/sweep.hpp"
#include "roomtone/tracer.hpp"

namespace roomtone::matopt {

/// Inverse material estimation problem for one room: match the log energy
/// of every traced path against the fitted decay curve, per band, relative
/// to the direct path.
struct OptProblem {
  const PathSet* paths = nullptr;
  sweep::DecayModel decay;
  std::vector<double> e0;    // direct-path energy per band
  double t0_measured = 0.0;  // first arrival in the measured IR
  int material_count = 0;
  double lower = 1e-4;       // keeps the log objective finite
  double upper = 1.0;
};

/// Builds the problem from a traced set (which must contain the direct
/// path) and a fitted decay model.
OptProblem make_problem(const PathSet& paths, const sweep::DecayModel& decay,
                        int material_count);

/// Sum of squared log10 residuals over all reflected paths in one band.
/// The direct path's residual is identically zero and is excluded.
double objective(std::span<const double> p, const OptProblem& problem,
                 int band);

/// Analytic gradient of the objective with respect to each material's
/// reflectance: d e_j / d p_i = e_j * count_ji / p_i.
std::vector<double> gradient(std::span<const double> p,
                             const OptProblem& problem, int band);

struct BandResult {
  std::vector<double> p;  // per material
  double j_initial = 0.0;
  double j_final = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

struct OptReport {
  std::vector<BandResult> bands;

  /// Reflectance table indexed [material][band].
  std::vector<std::vector<double>> reflectance_table() const;
};

struct OptimizeOptions {
  double init = 0.5;
  double gradient_tolerance = 1e-8;
  int max_iterations = 500;
  int threads = 0;  // 0 = hardware concurrency
};

/// Bounded quasi-Newton (projected L-BFGS) per band, bands in parallel.
/// J decreases monotonically across accepted steps. Throws NumericError if
/// every band fails to improve on the initial guess.
OptReport optimize_materials(const OptProblem& problem,
                             const OptimizeOptions& opts = {});

/// Deposits a band-shaped impulse per path, scaled by sqrt(band energy)
/// under the given reflectance table; the simulated counterpart of a
/// measured impulse response.
ImpulseResponse simulate_ir_from_paths(
    const PathSet& paths,
    const std::vector<std::vector<double>>& reflectance_table, double rate,
    const std::vector<double>& band_centers);

}  // namespace roomtone::matopt
