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

#include "roomtone/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace roomtone::filters {

std::vector<double> Sos::apply(const std::vector<double>& x) const {
  std::vector<double> y = x;
  for (const Biquad& s : sections_) {
    double z1 = 0.0, z2 = 0.0;  // transposed direct form II
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

double Sos::magnitude(double hz, double rate) const {
  const std::complex<double> z =
      std::exp(std::complex<double>(0.0, -2.0 * kPi * hz / rate));
  std::complex<double> h(1.0, 0.0);
  for (const Biquad& s : sections_) {
    h *= (s.b0 + s.b1 * z + s.b2 * z * z) /
         (1.0 + s.a1 * z + s.a2 * z * z);
  }
  return std::abs(h);
}

Biquad butter2_lowpass(double fc, double rate) {
  const double w0 = 2.0 * kPi * fc / rate;
  const double q = 1.0 / std::sqrt(2.0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = (1.0 - c) / 2.0 / a0;
  s.b1 = (1.0 - c) / a0;
  s.b2 = (1.0 - c) / 2.0 / a0;
  s.a1 = -2.0 * c / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

Biquad butter2_highpass(double fc, double rate) {
  const double w0 = 2.0 * kPi * fc / rate;
  const double q = 1.0 / std::sqrt(2.0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = (1.0 + c) / 2.0 / a0;
  s.b1 = -(1.0 + c) / a0;
  s.b2 = (1.0 + c) / 2.0 / a0;
  s.a1 = -2.0 * c / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

Sos butter_bandpass4(double f_lo, double f_hi, double rate) {
  if (!(0.0 < f_lo && f_lo < f_hi && f_hi < rate / 2.0))
    throw InputError("butter_bandpass4: bad band edges");

  using cd = std::complex<double>;
  const double fs2 = 2.0 * rate;
  const double w1 = fs2 * std::tan(kPi * f_lo / rate);  // prewarped
  const double w2 = fs2 * std::tan(kPi * f_hi / rate);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  // Order-2 Butterworth prototype poles, transformed to bandpass:
  // s^2 - bw*p*s + w0^2 = 0.
  const cd proto[2] = {cd(-std::sqrt(0.5), std::sqrt(0.5)),
                       cd(-std::sqrt(0.5), -std::sqrt(0.5))};
  cd apoles[4];
  int n = 0;
  for (const cd& p : proto) {
    const cd b = bw * p * 0.5;
    const cd d = std::sqrt(b * b - w0 * w0);
    apoles[n++] = b + d;
    apoles[n++] = b - d;
  }

  // Bilinear map; analog zeros are two at 0 (-> z=1) and two at inf (-> z=-1).
  cd zpoles[4];
  for (int i = 0; i < 4; ++i) zpoles[i] = (fs2 + apoles[i]) / (fs2 - apoles[i]);

  // Group poles into conjugate pairs; each section gets numerator (1 - z^-2).
  // Sort by imaginary part magnitude so conjugates sit together.
  std::sort(zpoles, zpoles + 4, [](const cd& a, const cd& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::vector<Biquad> sections;
  for (int i = 0; i < 4; i += 2) {
    const cd p = zpoles[i];
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    sections.push_back(s);
  }
  Sos sos(std::move(sections));

  // Normalize to unity at the (warped) digital center frequency.
  const double f_center = std::atan(w0 / fs2) * rate / kPi;
  const double g = sos.magnitude(f_center, rate);
  auto secs = sos.sections();
  secs[0].b0 /= g;
  secs[0].b1 /= g;
  secs[0].b2 /= g;
  return Sos(std::move(secs));
}

std::vector<double> filtfilt(const Sos& sos, const std::vector<double>& x) {
  std::vector<double> y = sos.apply(x);
  std::reverse(y.begin(), y.end());
  y = sos.apply(y);
  std::reverse(y.begin(), y.end());
  return y;
}

CrossoverBank::CrossoverBank(std::vector<double> band_centers, double rate)
    : centers_(std::move(band_centers)), rate_(rate) {
  if (centers_.empty()) throw InputError("CrossoverBank: no bands");
  for (std::size_t i = 1; i < centers_.size(); ++i) {
    if (centers_[i] <= centers_[i - 1])
      throw InputError("CrossoverBank: band centers must increase");
    crossovers_.push_back(std::sqrt(centers_[i - 1] * centers_[i]));
  }
  for (double x : crossovers_)
    if (x >= rate_ / 2.0)
      throw InputError("CrossoverBank: crossover above Nyquist");
}

std::vector<double> CrossoverBank::lr4_low(const std::vector<double>& x,
                                           int xover) const {
  const Biquad s = butter2_lowpass(crossovers_[static_cast<std::size_t>(xover)],
                                   rate_);
  return Sos({s, s}).apply(x);
}

std::vector<double> CrossoverBank::lr4_high(const std::vector<double>& x,
                                            int xover) const {
  const Biquad s = butter2_highpass(
      crossovers_[static_cast<std::size_t>(xover)], rate_);
  return Sos({s, s}).apply(x);
}

std::vector<std::vector<double>> CrossoverBank::split(
    const std::vector<double>& x) const {
  const int nb = band_count();
  std::vector<std::vector<double>> bands;
  bands.reserve(static_cast<std::size_t>(nb));

  std::vector<double> rem = x;
  for (int k = 0; k < nb - 1; ++k) {
    bands.push_back(lr4_low(rem, k));
    rem = lr4_high(rem, k);
  }
  bands.push_back(std::move(rem));

  // Allpass correction: band i also passes through every crossover it
  // skipped, which makes the bank sum telescope to a pure allpass chain.
  for (int i = 0; i < nb - 1; ++i) {
    for (int j = i + 1; j < nb - 1; ++j) {
      std::vector<double> lo = lr4_low(bands[static_cast<std::size_t>(i)], j);
      std::vector<double> hi = lr4_high(bands[static_cast<std::size_t>(i)], j);
      auto& b = bands[static_cast<std::size_t>(i)];
      for (std::size_t s = 0; s < b.size(); ++s) b[s] = lo[s] + hi[s];
    }
  }
  return bands;
}

namespace {

std::size_t ring_cap(std::size_t n) {
  std::size_t p = 256;
  while (p < n && p < (1u << 17)) p <<= 1;
  return p;
}

std::size_t ring_out_length(double lowest_center, double rate) {
  // Long enough for the lowest band to decay below ~-140 dB.
  const double seconds = std::min(2.0, 24.0 / lowest_center + 0.05);
  return ring_cap(static_cast<std::size_t>(seconds * rate));
}

}  // namespace

KernelBank::KernelBank(std::vector<double> band_centers, double rate)
    : bank_(std::move(band_centers), rate), rate_(rate) {
  const std::size_t len = ring_out_length(bank_.centers().front(), rate);
  std::vector<double> impulse(len, 0.0);
  impulse[0] = 1.0;
  auto bands = bank_.split(impulse);

  prototypes_.resize(bands.size());
  raw_energy_.resize(bands.size());
  for (std::size_t b = 0; b < bands.size(); ++b) {
    double e = 0.0;
    for (double v : bands[b]) e += v * v;
    raw_energy_[b] = e;
    // Trim the negligible tail, then normalize to unit energy.
    std::size_t end = bands[b].size();
    const double floor = 1e-14 * e;
    double tail = 0.0;
    while (end > 1) {
      tail += bands[b][end - 1] * bands[b][end - 1];
      if (tail > floor) break;
      --end;
    }
    bands[b].resize(end);
    const double scale = e > 0.0 ? 1.0 / std::sqrt(e) : 0.0;
    for (double& v : bands[b]) v *= scale;
    prototypes_[b] = std::move(bands[b]);
  }
}

void KernelBank::deposit(std::vector<double>& out, std::size_t offset,
                         const std::vector<double>& band_energy,
                         double polarity) const {
  if (band_energy.size() != prototypes_.size())
    throw InputError("KernelBank::deposit: band count mismatch");

  double want = 0.0;
  std::size_t len = 0;
  for (std::size_t b = 0; b < prototypes_.size(); ++b)
    if (band_energy[b] > 0.0) {
      want += band_energy[b];
      len = std::max(len, prototypes_[b].size());
    }
  if (want <= 0.0) return;

  std::vector<double> kernel(len, 0.0);
  for (std::size_t b = 0; b < prototypes_.size(); ++b) {
    const double e = band_energy[b];
    if (e <= 0.0) continue;
    const double g = std::sqrt(e);
    const auto& proto = prototypes_[b];
    for (std::size_t i = 0; i < proto.size(); ++i)
      kernel[i] += g * proto[i];
  }

  // Adjacent LR4 bands overlap in phase, which inflates the summed energy;
  // rescale so the deposited kernel carries exactly the requested total
  // while per-band ratios stay untouched.
  double got = 0.0;
  for (double v : kernel) got += v * v;
  const double fix = polarity * std::sqrt(want / got);

  if (out.size() < offset + len) out.resize(offset + len, 0.0);
  for (std::size_t i = 0; i < len; ++i) out[offset + i] += fix * kernel[i];
}

}  // namespace roomtone::filters
