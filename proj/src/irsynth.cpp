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

#include "roomtone/irsynth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "roomtone/dsp.hpp"

namespace roomtone::irsynth {

double ModulationCurve::gain_at(double hz) const {
  if (ratio.empty()) return 1.0;
  const double spacing = rate / 256.0;
  const double pos = hz / spacing;
  if (pos <= 0.0) return ratio.front();
  const auto last = static_cast<double>(ratio.size() - 1);
  if (pos >= last) return ratio.back();
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  // Interpolate in the log domain so that interpolating two curves and
  // multiplying equals interpolating their product.
  const double la = std::log(std::max(ratio[i], 1e-30));
  const double lb = std::log(std::max(ratio[i + 1], 1e-30));
  return std::exp(la * (1.0 - frac) + lb * frac);
}

ModulationCurve ModulationCurve::identity(double rate) {
  ModulationCurve m;
  m.rate = rate;
  m.ratio.assign(128, 1.0);
  return m;
}

Signal er_ray_ir(const PathRecord& ray, const filters::KernelBank& bank) {
  Signal kernel;
  kernel.rate = bank.rate();
  const auto offset = static_cast<std::size_t>(
      std::max(0.0, std::round(ray.arrival_time * bank.rate())));
  bank.deposit(kernel.samples, offset, ray.band_energy,
               tracer::path_polarity(ray));
  return kernel;
}

Signal er_ray_ir(const PathRecord& ray, double rate,
                 const std::vector<double>& band_centers) {
  return er_ray_ir(ray, filters::KernelBank(band_centers, rate));
}

ModulationCurve compute_modulation(const ImpulseResponse& measured,
                                   const ImpulseResponse& simulated,
                                   double t0) {
  if (measured.rate != simulated.rate)
    throw InputError("compute_modulation: sample rates differ");
  const double rate = measured.rate;
  constexpr std::size_t kWindow = 256;
  constexpr std::size_t kHop = 16;
  constexpr std::size_t kBins = kWindow / 2;

  const auto s0 =
      static_cast<std::size_t>(std::max<long long>(0, std::llround(t0 * rate)));
  const std::size_t needed = s0 + 2 * kWindow;  // last window ends at s0+512
  if (measured.samples.size() < needed || simulated.samples.size() < needed)
    throw InputError(
        "compute_modulation: impulse responses too short past t0");

  struct WindowMags {
    std::array<double, kBins> meas;
    std::array<double, kBins> sim;
    double sim_peak = 0.0;
  };
  std::vector<WindowMags> mags;
  double global_sim_peak = 0.0;

  // Slide the analysis window within [t0, t0 + 2*dt]: 17 window positions.
  for (std::size_t k = 0; k * kHop + kWindow <= 2 * kWindow; ++k) {
    const std::size_t start = s0 + k * kHop;
    std::vector<std::complex<double>> fm(kWindow), fs(kWindow);
    for (std::size_t i = 0; i < kWindow; ++i) {
      fm[i] = measured.samples[start + i];
      fs[i] = simulated.samples[start + i];
    }
    dsp::fft(fm, false);
    dsp::fft(fs, false);
    WindowMags w;
    for (std::size_t b = 0; b < kBins; ++b) {
      w.meas[b] = std::abs(fm[b]);
      w.sim[b] = std::abs(fs[b]);
      w.sim_peak = std::max(w.sim_peak, w.sim[b]);
    }
    global_sim_peak = std::max(global_sim_peak, w.sim_peak);
    mags.push_back(w);
  }

  ModulationCurve curve;
  curve.rate = rate;
  curve.ratio.assign(kBins, 1.0);
  if (global_sim_peak <= 0.0) return curve;  // both sides silent

  const double bin_floor = 1e-9 * global_sim_peak;
  std::array<double, kBins> acc{};
  std::size_t used = 0;
  for (const auto& w : mags) {
    if (w.sim_peak < bin_floor) continue;  // empty window, skip
    for (std::size_t b = 0; b < kBins; ++b)
      acc[b] += w.sim[b] < bin_floor ? 1.0 : w.meas[b] / w.sim[b];
    ++used;
  }
  if (used == 0) return curve;
  for (std::size_t b = 0; b < kBins; ++b)
    curve.ratio[b] = acc[b] / static_cast<double>(used);
  return curve;
}

Signal apply_modulation(const Signal& kernel, const ModulationCurve& m) {
  if (kernel.samples.empty()) return kernel;
  const std::size_t n = dsp::next_pow2(kernel.samples.size());
  auto spec = dsp::fft_real(kernel.samples, n);

  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double hz = static_cast<double>(k) * kernel.rate /
                      static_cast<double>(n);
    const double g = m.gain_at(hz);
    spec[k] *= g;
    if (k > 0 && k < n / 2) spec[n - k] *= g;  // keep conjugate symmetry
  }
  dsp::fft(spec, true);

  Signal out;
  out.rate = kernel.rate;
  out.samples.resize(kernel.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = spec[i].real();
  return out;
}

Signal lr_tail(const ImpulseResponse& measured, double t_er,
               const PathSet& paths, double window) {
  const auto cut = static_cast<std::size_t>(std::llround(t_er * measured.rate));
  if (cut >= measured.samples.size())
    throw InputError("lr_tail: measured IR ends before t_er");

  double sim_energy = 0.0;
  std::size_t rays_in_window = 0;
  for (const auto& path : paths.paths) {
    if (path.arrival_time < t_er - window || path.arrival_time > t_er)
      continue;
    for (double e : path.band_energy) sim_energy += e;
    ++rays_in_window;
  }
  if (rays_in_window == 0)
    throw NumericError(
        "lr_tail: no rays arrive in the matching window before t_er; widen "
        "the window or raise the ray budget");

  // Discrete energy (sum of squared samples), the same convention the ray
  // kernels deposit in, so the scale is a pure energy ratio.
  const auto w0 = static_cast<std::size_t>(
      std::max(0.0, std::round((t_er - window) * measured.rate)));
  double meas_energy = 0.0;
  for (std::size_t i = w0; i < cut && i < measured.samples.size(); ++i)
    meas_energy += measured.samples[i] * measured.samples[i];
  if (meas_energy <= 0.0)
    throw NumericError("lr_tail: measured IR has no energy in the window");

  const double scale = std::sqrt(sim_energy / meas_energy);
  Signal out;
  out.rate = measured.rate;
  out.samples.assign(measured.samples.size(), 0.0);
  for (std::size_t i = cut; i < measured.samples.size(); ++i)
    out.samples[i] = scale * measured.samples[i];
  return out;
}

Signal crossroom_lrir(const Signal& lr1, const Signal& lr2,
                      const std::vector<Signal>& er_s_to_door,
                      const std::vector<Signal>& er_d_to_door,
                      double area_per_sample) {
  if (er_s_to_door.empty() || er_s_to_door.size() != er_d_to_door.size())
    throw InputError("crossroom_lrir: door sample lists empty or mismatched");
  for (const auto* list : {&er_s_to_door, &er_d_to_door})
    for (const auto& s : *list)
      if (s.rate != lr1.rate)
        throw InputError("crossroom_lrir: sample rates differ");
  if (lr1.rate != lr2.rate)
    throw InputError("crossroom_lrir: sample rates differ");

  auto accumulate = [](std::vector<double>& acc,
                       const std::vector<double>& term) {
    if (acc.size() < term.size()) acc.resize(term.size(), 0.0);
    for (std::size_t i = 0; i < term.size(); ++i) acc[i] += term[i];
  };

  std::vector<double> sum_s, sum_d;
  for (const auto& er : er_s_to_door)
    accumulate(sum_s, dsp::convolve(er.samples, lr2.samples));
  for (const auto& er : er_d_to_door)
    accumulate(sum_d, dsp::convolve(er.samples, lr1.samples));

  // The tail-tail term does not depend on the door sample; it appears once
  // per sample in the sum.
  std::vector<double> tails = dsp::convolve(lr1.samples, lr2.samples);
  const double count = static_cast<double>(er_s_to_door.size());

  Signal out;
  out.rate = lr1.rate;
  out.samples.assign(
      std::max({sum_s.size(), sum_d.size(), tails.size()}), 0.0);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const double a = i < sum_s.size() ? sum_s[i] : 0.0;
    const double b = i < sum_d.size() ? sum_d[i] : 0.0;
    const double c = i < tails.size() ? count * tails[i] : 0.0;
    out.samples[i] = area_per_sample * (a + b + c);
  }
  return out;
}

DirectionalIr synthesize_directional_ir(const Scene& scene, const Vec3& source,
                                        const Vec3& listener,
                                        const ImpulseResponse& measured,
                                        double t_er,
                                        const SynthesisOptions& opts) {
  const PathSet paths = tracer::trace_paths(scene, source, listener,
                                            opts.ray_budget, t_er, opts.seed,
                                            opts.trace);
  if (paths.paths.empty())
    throw NumericError("synthesize_directional_ir: no paths reached the "
                       "listener within t_er");

  const filters::KernelBank bank(scene.band_centers, opts.rate);
  // The early part lives strictly before t_er; the measured tail carries
  // everything after it, so kernels are cut at the boundary rather than
  // ringing into the tail's territory twice.
  const auto cut =
      static_cast<std::size_t>(std::llround(t_er * opts.rate));
  DirectionalIr ir;
  ir.t_er = t_er;
  ir.entries.reserve(paths.paths.size());
  for (const auto& path : paths.paths) {
    Signal kernel = er_ray_ir(path, bank);
    if (kernel.samples.size() > cut) kernel.samples.resize(cut);
    if (opts.modulation) kernel = apply_modulation(kernel, *opts.modulation);
    ir.entries.push_back({path.direction, std::move(kernel)});
  }
  ir.lr_tail = lr_tail(measured, t_er, paths, opts.tail_window);
  return ir;
}

}  // namespace roomtone::irsynth
