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

#include "roomtone/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "roomtone/dsp.hpp"
#include "roomtone/filters.hpp"

namespace roomtone::sweep {

Signal gen_sweep(double f1, double f2, double duration, double rate) {
  if (!(0.0 < f1 && f1 < f2 && f2 < rate / 2.0))
    throw InputError("gen_sweep: need 0 < f1 < f2 < rate/2");
  if (duration <= 0.0) throw InputError("gen_sweep: duration must be > 0");

  const double w1 = 2.0 * kPi * f1;
  const double log_ratio = std::log(f2 / f1);
  const double k = w1 * duration / log_ratio;

  Signal s;
  s.rate = rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(duration * rate));
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    s.samples[i] = std::sin(k * (std::exp(t / duration * log_ratio) - 1.0));
  }
  return s;
}

ImpulseResponse deconvolve_ir(const Signal& recording, const Signal& sweep,
                              double regularization) {
  if (recording.rate != sweep.rate)
    throw InputError("deconvolve_ir: sample rates differ");
  if (recording.samples.size() < sweep.samples.size())
    throw InputError("deconvolve_ir: recording shorter than sweep");
  if (sweep.samples.empty()) throw InputError("deconvolve_ir: empty sweep");

  const std::size_t n =
      dsp::next_pow2(recording.samples.size() + sweep.samples.size());
  auto fr = dsp::fft_real(recording.samples, n);
  const auto fe = dsp::fft_real(sweep.samples, n);

  double peak_power = 0.0;
  for (const auto& c : fe) peak_power = std::max(peak_power, std::norm(c));
  const double floor = regularization * peak_power;

  for (std::size_t i = 0; i < n; ++i)
    fr[i] = fr[i] * std::conj(fe[i]) / (std::norm(fe[i]) + floor);
  dsp::fft(fr, true);

  // Causal lags only (negative lags live at the top of the buffer).
  ImpulseResponse ir;
  ir.rate = recording.rate;
  ir.samples.resize(recording.samples.size());
  for (std::size_t i = 0; i < ir.samples.size(); ++i)
    ir.samples[i] = fr[i].real();

  double peak = 0.0;
  for (double v : ir.samples) peak = std::max(peak, std::abs(v));
  if (peak < 1e-12)
    throw NumericError("deconvolve_ir: recording is silent");
  for (double& v : ir.samples) v /= peak;

  const double onset = 0.1;  // -20 dB of the (now unit) peak
  ir.first_arrival = 0.0;
  for (std::size_t i = 0; i < ir.samples.size(); ++i)
    if (std::abs(ir.samples[i]) >= onset) {
      ir.first_arrival = static_cast<double>(i) / ir.rate;
      break;
    }
  return ir;
}

Signal energy_response(const ImpulseResponse& ir, int band,
                       const std::vector<double>& band_centers) {
  Signal h;
  h.rate = ir.rate;
  if (band == kBroadband) {
    h.samples = ir.samples;
  } else {
    if (band < 0 || static_cast<std::size_t>(band) >= band_centers.size())
      throw InputError("energy_response: band index out of range");
    const double center = band_centers[static_cast<std::size_t>(band)];
    const double lo = center / std::sqrt(2.0);
    const double hi = std::min(center * std::sqrt(2.0), 0.49 * ir.rate);
    const auto sos = filters::butter_bandpass4(lo, hi, ir.rate);
    h.samples = filters::filtfilt(sos, ir.samples);
  }
  for (double& v : h.samples) v *= v;
  return h;
}

DecayFit fit_decay(const Signal& h_band, double t_start, double floor_db) {
  const auto& h = h_band.samples;
  const std::size_t start = static_cast<std::size_t>(
      std::max(0.0, std::floor(t_start * h_band.rate)));

  double peak = 0.0;
  for (std::size_t i = start; i < h.size(); ++i) peak = std::max(peak, h[i]);
  if (peak <= 0.0)
    throw InputError("fit_decay: no energy after t_start");
  const double floor = peak * std::pow(10.0, floor_db / 10.0);

  // Linear regression of log h on t over samples above the floor.
  double sum_t = 0.0, sum_y = 0.0, sum_tt = 0.0, sum_ty = 0.0;
  std::size_t count = 0;
  for (std::size_t i = start; i < h.size(); ++i) {
    if (h[i] < floor || h[i] <= 0.0) continue;
    const double t = static_cast<double>(i) / h_band.rate;
    const double y = std::log(h[i]);
    sum_t += t;
    sum_y += y;
    sum_tt += t * t;
    sum_ty += t * y;
    ++count;
  }
  if (count < 8)
    throw InputError("fit_decay: insufficient samples above the noise floor");

  const double nd = static_cast<double>(count);
  const double denom = nd * sum_tt - sum_t * sum_t;
  if (std::abs(denom) < 1e-30)
    throw NumericError("fit_decay: degenerate time support");
  const double slope = (nd * sum_ty - sum_t * sum_y) / denom;
  const double intercept = (sum_y - slope * sum_t) / nd;

  DecayFit fit;
  fit.amplitude = std::exp(intercept);
  fit.rate = -slope;
  fit.samples_used = count;
  fit.degenerate = !(fit.rate > 1e-9);
  return fit;
}

DecayModel fit_decay_model(const ImpulseResponse& ir,
                           const std::vector<double>& band_centers,
                           double floor_db) {
  DecayModel model;
  model.t0 = ir.first_arrival;
  for (std::size_t b = 0; b < band_centers.size(); ++b) {
    const Signal h = energy_response(ir, static_cast<int>(b), band_centers);
    const DecayFit fit = fit_decay(h, ir.first_arrival, floor_db);
    model.bands.push_back(
        {band_centers[b], fit.amplitude, std::max(fit.rate, 1e-9)});
  }
  return model;
}

}  // namespace roomtone::sweep
