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

#include <vector>

#include "roomtone/core.hpp"

namespace roomtone::filters {

struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;  // normalized (a0 == 1)
};

/// Cascade of second-order sections, applied with zero initial state.
class Sos {
 public:
  Sos() = default;
  explicit Sos(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  std::vector<double> apply(const std::vector<double>& x) const;

  /// Magnitude response at frequency hz.
  double magnitude(double hz, double rate) const;

  const std::vector<Biquad>& sections() const { return sections_; }

 private:
  std::vector<Biquad> sections_;
};

/// 2nd-order Butterworth low/high pass (RBJ bilinear form, Q = 1/sqrt(2)).
Biquad butter2_lowpass(double fc, double rate);
Biquad butter2_highpass(double fc, double rate);

/// 4th-order Butterworth bandpass (order-2 prototype, bilinear transform),
/// -3 dB at both edges. Used by the analysis filterbank.
Sos butter_bandpass4(double f_lo, double f_hi, double rate);

/// Zero-phase forward-backward filtering.
std::vector<double> filtfilt(const Sos& sos, const std::vector<double>& x);

/// Linkwitz-Riley 4th-order multiband splitter. Band signals carry allpass
/// corrections from the crossovers they skip, so the bands sum to an
/// allpass-flat whole.
class CrossoverBank {
 public:
  CrossoverBank(std::vector<double> band_centers, double rate);

  int band_count() const { return static_cast<int>(centers_.size()); }
  double rate() const { return rate_; }
  const std::vector<double>& centers() const { return centers_; }

  /// Splits x into band_count() signals whose sum is allpass-flat.
  std::vector<std::vector<double>> split(const std::vector<double>& x) const;

 private:
  std::vector<double> lr4_low(const std::vector<double>& x, int xover) const;
  std::vector<double> lr4_high(const std::vector<double>& x, int xover) const;

  std::vector<double> centers_;
  std::vector<double> crossovers_;  // size band_count()-1
  double rate_;
};

/// Per-band impulse prototypes for depositing band-shaped energy at a sample
/// offset. Prototypes are normalized to unit energy so a kernel built as
/// sum_b sqrt(e_b) * prototype_b carries total energy sum_b e_b.
class KernelBank {
 public:
  KernelBank(std::vector<double> band_centers, double rate);

  int band_count() const { return bank_.band_count(); }
  double rate() const { return rate_; }

  const std::vector<double>& prototype(int band) const {
    return prototypes_[static_cast<std::size_t>(band)];
  }

  /// Energy of the raw (un-normalized) LR4 band impulse.
  double raw_band_energy(int band) const {
    return raw_energy_[static_cast<std::size_t>(band)];
  }

  /// Adds polarity * sum_b sqrt(band_energy[b]) * prototype_b into out at
  /// the given sample offset, growing out as needed.
  void deposit(std::vector<double>& out, std::size_t offset,
               const std::vector<double>& band_energy,
               double polarity = 1.0) const;

 private:
  CrossoverBank bank_;
  std::vector<std::vector<double>> prototypes_;
  std::vector<double> raw_energy_;
  double rate_;
};

}  // namespace roomtone::filters
