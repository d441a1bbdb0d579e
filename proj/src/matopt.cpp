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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <thread>

#include "roomtone/filters.hpp"

namespace roomtone::matopt {

namespace {

constexpr double kLn10 = 2.302585092994046;

// Per-band compiled view: residual_j(p) = base_j + sum_i c_ji*log10(p_i)
// - target_j, which makes both the objective and Eq.-style gradient cheap.
struct BandData {
  std::vector<double> base;             // log10(beta_j / e0)
  std::vector<double> target;           // log10(h~(t_j)/h~(t0))
  std::vector<std::vector<double>> counts;  // [path][material]
};

BandData compile_band(const OptProblem& problem, int band) {
  const auto& paths = problem.paths->paths;
  const double e0 = problem.e0[static_cast<std::size_t>(band)];
  const auto& decay_band =
      problem.decay.bands[static_cast<std::size_t>(band)];

  BandData data;
  for (const auto& path : paths) {
    if (path.bounce_count() == 0) continue;  // direct path excluded
    const double beta = path.air_factor[static_cast<std::size_t>(band)];
    if (beta <= 0.0) continue;
    data.base.push_back(std::log10(beta / e0));
    // log10 of h~(t)/h~(t0) with h~ = A exp(-gamma t): A cancels.
    data.target.push_back(-decay_band.rate *
                          (path.arrival_time - problem.t0_measured) / kLn10);
    std::vector<double> c(static_cast<std::size_t>(problem.material_count),
                          0.0);
    for (uint32_t m : path.material_seq) {
      if (m >= c.size())
        throw InputError("objective: path references material " +
                         std::to_string(m) + " beyond material_count");
      c[m] += 1.0;
    }
    data.counts.push_back(std::move(c));
  }
  return data;
}

void check_p(std::span<const double> p) {
  for (double v : p)
    if (!(v > 0.0))
      throw InputError("material reflectance must be positive (log domain)");
}

double objective_compiled(const BandData& d,
                          std::span<const double> log10_p) {
  double j = 0.0;
  for (std::size_t k = 0; k < d.base.size(); ++k) {
    double r = d.base[k] - d.target[k];
    const auto& c = d.counts[k];
    for (std::size_t i = 0; i < c.size(); ++i) r += c[i] * log10_p[i];
    j += r * r;
  }
  return j;
}

void gradient_compiled(const BandData& d, std::span<const double> log10_p,
                       std::span<const double> p, std::vector<double>& g) {
  std::fill(g.begin(), g.end(), 0.0);
  for (std::size_t k = 0; k < d.base.size(); ++k) {
    double r = d.base[k] - d.target[k];
    const auto& c = d.counts[k];
    for (std::size_t i = 0; i < c.size(); ++i) r += c[i] * log10_p[i];
    // (2/ln10) * r * c_ji / p_i, the analytic derivative of the log residual.
    const double w = 2.0 / kLn10 * r;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i] != 0.0) g[i] += w * c[i] / p[i];
  }
}

std::vector<double> log10_of(std::span<const double> p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::log10(p[i]);
  return out;
}

}  // namespace

OptProblem make_problem(const PathSet& paths, const sweep::DecayModel& decay,
                        int material_count) {
  if (static_cast<int>(decay.bands.size()) != paths.band_count)
    throw InputError("make_problem: decay bands and path bands differ");
  const PathRecord* direct = nullptr;
  for (const auto& p : paths.paths)
    if (p.bounce_count() == 0) {
      direct = &p;
      break;
    }
  if (!direct)
    throw InputError("make_problem: path set has no direct path for e0");

  OptProblem problem;
  problem.paths = &paths;
  problem.decay = decay;
  problem.e0 = direct->band_energy;
  for (double e : problem.e0)
    if (!(e > 0.0))
      throw InputError("make_problem: direct-path energy must be positive");
  problem.t0_measured = decay.t0;
  problem.material_count = material_count;
  return problem;
}

double objective(std::span<const double> p, const OptProblem& problem,
                 int band) {
  check_p(p);
  const BandData d = compile_band(problem, band);
  if (d.base.empty())
    throw InputError("objective: no reflected paths in band");
  return objective_compiled(d, log10_of(p));
}

std::vector<double> gradient(std::span<const double> p,
                             const OptProblem& problem, int band) {
  check_p(p);
  const BandData d = compile_band(problem, band);
  if (d.base.empty())
    throw InputError("gradient: no reflected paths in band");
  std::vector<double> g(p.size());
  gradient_compiled(d, log10_of(p), p, g);
  return g;
}

std::vector<std::vector<double>> OptReport::reflectance_table() const {
  if (bands.empty()) return {};
  const std::size_t n_mat = bands[0].p.size();
  std::vector<std::vector<double>> table(
      n_mat, std::vector<double>(bands.size(), 0.0));
  for (std::size_t b = 0; b < bands.size(); ++b)
    for (std::size_t m = 0; m < n_mat; ++m) table[m][b] = bands[b].p[m];
  return table;
}

namespace {

double clip(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

// Gradient components that can still move inside the box.
double projected_gradient_norm(const std::vector<double>& x,
                               const std::vector<double>& g, double lo,
                               double hi) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double gi = g[i];
    if (x[i] <= lo && gi > 0.0) gi = 0.0;
    if (x[i] >= hi && gi < 0.0) gi = 0.0;
    s += gi * gi;
  }
  return std::sqrt(s);
}

BandResult optimize_band(const OptProblem& problem, int band,
                         const OptimizeOptions& opts) {
  const BandData data = compile_band(problem, band);
  if (data.base.empty())
    throw InputError("optimize_materials: no reflected paths in band " +
                     std::to_string(band));

  const std::size_t n = static_cast<std::size_t>(problem.material_count);
  const double lo = problem.lower, hi = problem.upper;

  std::vector<double> x(n, clip(opts.init, lo, hi));
  auto eval_j = [&](const std::vector<double>& v) {
    return objective_compiled(data, log10_of(v));
  };
  auto eval_g = [&](const std::vector<double>& v, std::vector<double>& g) {
    gradient_compiled(data, log10_of(v), v, g);
  };

  std::vector<double> g(n), x_new(n), g_new(n);
  double j = eval_j(x);
  eval_g(x, g);

  BandResult result;
  result.j_initial = j;

  // Projected L-BFGS with backtracking line search.
  constexpr int kMemory = 8;
  std::vector<std::vector<double>> s_hist, y_hist;
  std::vector<double> rho_hist;

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const double gnorm = projected_gradient_norm(x, g, lo, hi);
    result.gradient_norm = gnorm;
    if (gnorm < opts.gradient_tolerance) break;

    // Two-loop recursion for d = -H g.
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      double a = 0.0;
      for (std::size_t i = 0; i < n; ++i) a += s_hist[k][i] * d[i];
      a *= rho_hist[k];
      alpha[k] = a;
      for (std::size_t i = 0; i < n; ++i) d[i] -= a * y_hist[k][i];
    }
    if (!s_hist.empty()) {
      double sy = 0.0, yy = 0.0;
      const auto& s = s_hist.back();
      const auto& y = y_hist.back();
      for (std::size_t i = 0; i < n; ++i) {
        sy += s[i] * y[i];
        yy += y[i] * y[i];
      }
      const double h0 = sy / std::max(yy, 1e-300);
      for (std::size_t i = 0; i < n; ++i) d[i] *= h0;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      double b = 0.0;
      for (std::size_t i = 0; i < n; ++i) b += y_hist[k][i] * d[i];
      b *= rho_hist[k];
      for (std::size_t i = 0; i < n; ++i)
        d[i] += (alpha[k] - b) * s_hist[k][i];
    }

    // Backtracking with box projection; Armijo on the projected step.
    bool accepted = false;
    for (int fallback = 0; fallback < 2 && !accepted; ++fallback) {
      if (fallback == 1) {
        // Quasi-Newton direction failed; retry with steepest descent.
        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        const double step0 = gmax > 0.0 ? 0.1 / gmax : 1.0;
        for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] * step0;
      }
      double step = 1.0;
      for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
        for (std::size_t i = 0; i < n; ++i)
          x_new[i] = clip(x[i] + step * d[i], lo, hi);
        double dir_deriv = 0.0;
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
          dir_deriv += g[i] * (x_new[i] - x[i]);
          moved = moved || x_new[i] != x[i];
        }
        if (!moved) break;
        if (dir_deriv >= 0.0) continue;  // projection flipped the direction
        const double j_new = eval_j(x_new);
        if (j_new <= j + 1e-4 * dir_deriv) {
          eval_g(x_new, g_new);
          std::vector<double> s(n), y(n);
          double sy = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
          }
          if (sy > 1e-12) {
            if (s_hist.size() == kMemory) {
              s_hist.erase(s_hist.begin());
              y_hist.erase(y_hist.begin());
              rho_hist.erase(rho_hist.begin());
            }
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
          }
          x = x_new;
          g = g_new;
          j = j_new;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;  // no progress possible
  }

  result.p = x;
  result.j_final = j;
  result.iterations = iter;
  result.gradient_norm = projected_gradient_norm(x, g, lo, hi);
  return result;
}

}  // namespace

OptReport optimize_materials(const OptProblem& problem,
                             const OptimizeOptions& opts) {
  if (!problem.paths || problem.paths->paths.empty())
    throw InputError("optimize_materials: no paths");
  const int nb = problem.paths->band_count;

  unsigned n_threads = opts.threads > 0
                           ? static_cast<unsigned>(opts.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(nb));

  OptReport report;
  report.bands.resize(static_cast<std::size_t>(nb));
  std::vector<std::future<void>> jobs;
  std::atomic<int> next{0};
  for (unsigned w = 0; w < n_threads; ++w)
    jobs.push_back(std::async(std::launch::async, [&] {
      for (int b = next.fetch_add(1); b < nb; b = next.fetch_add(1))
        report.bands[static_cast<std::size_t>(b)] =
            optimize_band(problem, b, opts);
    }));
  for (auto& j : jobs) j.get();

  bool any_decrease = false;
  for (const auto& b : report.bands)
    if (b.j_final < b.j_initial || b.j_initial <= 1e-12) any_decrease = true;
  if (!any_decrease)
    throw NumericError(
        "optimize_materials: failed to decrease the objective in any band");
  return report;
}

ImpulseResponse simulate_ir_from_paths(
    const PathSet& paths,
    const std::vector<std::vector<double>>& reflectance_table, double rate,
    const std::vector<double>& band_centers) {
  if (paths.paths.empty())
    throw InputError("simulate_ir_from_paths: empty path set");
  const filters::KernelBank bank(band_centers, rate);

  ImpulseResponse ir;
  ir.rate = rate;
  ir.first_arrival = paths.paths.front().arrival_time;
  for (const auto& path : paths.paths) {
    const auto energy = tracer::path_energy(path, reflectance_table);
    const auto offset =
        static_cast<std::size_t>(std::llround(path.arrival_time * rate));
    bank.deposit(ir.samples, offset, energy, tracer::path_polarity(path));
  }
  return ir;
}

}  // namespace roomtone::matopt
