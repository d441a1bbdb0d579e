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

#include <optional>
#include <vector>

#include "roomtone/core.hpp"

namespace roomtone::sweep {

/// Exponential sine sweep from f1 to f2 Hz over T seconds. The instantaneous
/// frequency is f1 at t=0 and f2 at t=T.
Signal gen_sweep(double f1, double f2, double duration, double rate);

/// Recovers the impulse response from a recorded sweep by whitened
/// cross-correlation (matched filter with inverse power-spectrum weighting,
/// the classic inverse-sweep deconvolution). The result is the causal part,
/// peak-normalized to |max| = 1; first_arrival is the first sample above
/// -20 dB of the peak.
ImpulseResponse deconvolve_ir(const Signal& recording, const Signal& sweep,
                              double regularization = 1e-8);

struct DecayBand {
  double center_hz = 0.0;
  double amplitude = 0.0;  // A, energy units
  double rate = 0.0;       // gamma, 1/seconds
};

struct DecayModel {
  std::vector<DecayBand> bands;
  double t0 = 0.0;  // measured first arrival the fit is anchored to

  /// h~(t) = A * exp(-gamma t) for the given band.
  double evaluate(int band, double t) const {
    const auto& b = bands[static_cast<std::size_t>(band)];
    return b.amplitude * std::exp(-b.rate * t);
  }
};

inline constexpr int kBroadband = -1;

/// Squared (energy) response; band >= 0 applies the zero-phase 4th-order
/// Butterworth octave filter first, kBroadband squares the raw samples.
Signal energy_response(const ImpulseResponse& ir, int band,
                       const std::vector<double>& band_centers);

struct DecayFit {
  double amplitude = 0.0;
  double rate = 0.0;
  std::size_t samples_used = 0;
  bool degenerate = false;  // fitted rate not meaningfully positive
};

/// Log-domain least squares of h(t) ~ A exp(-gamma t) over samples after
/// t_start that sit above the noise floor (floor_db below the band peak).
DecayFit fit_decay(const Signal& h_band, double t_start,
                   double floor_db = -60.0);

/// Per-band decay model of a measured impulse response.
DecayModel fit_decay_model(const ImpulseResponse& ir,
                           const std::vector<double>& band_centers,
                           double floor_db = -60.0);

}  // namespace roomtone::sweep
