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

#include <complex>

#include "doctest.h"
#include "roomtone/core.hpp"
#include "roomtone/dsp.hpp"

using namespace roomtone;

namespace {

constexpr double kRate = 48000.0;

double spectrum_mag_at(const std::vector<double>& x, double hz, double rate) {
  const std::size_t n = dsp::next_pow2(x.size());
  auto spec = dsp::fft_real(x, n);
  const double bin = hz / rate * static_cast<double>(n);
  return std::abs(spec[static_cast<std::size_t>(std::llround(bin))]);
}

}  // namespace

TEST_CASE("butterworth bandpass hits -3 dB at the edges") {
  const double lo = 707.1, hi = 1414.2;
  const auto sos = filters::butter_bandpass4(lo, hi, kRate);
  CHECK(sos.magnitude(std::sqrt(lo * hi), kRate) ==
        doctest::Approx(1.0).epsilon(1e-3));
  CHECK(sos.magnitude(lo, kRate) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(2e-2));
  CHECK(sos.magnitude(hi, kRate) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(2e-2));
  // 12 dB/octave skirts: one octave out should be well down.
  CHECK(sos.magnitude(lo / 2.0, kRate) < 0.3);
  CHECK(sos.magnitude(hi * 2.0, kRate) < 0.3);
}

TEST_CASE("filtfilt is zero phase") {
  // A symmetric pulse stays symmetric about its center under filtfilt.
  const auto sos = filters::butter_bandpass4(500.0, 2000.0, kRate);
  std::vector<double> x(4096, 0.0);
  x[2048] = 1.0;
  const auto y = filters::filtfilt(sos, x);
  for (std::size_t k = 1; k < 400; ++k)
    CHECK(y[2048 + k] == doctest::Approx(y[2048 - k]).epsilon(1e-6));
}

TEST_CASE("crossover bands sum allpass-flat") {
  const filters::CrossoverBank bank(default_band_centers(), kRate);
  std::vector<double> impulse(1 << 15, 0.0);
  impulse[0] = 1.0;
  const auto bands = bank.split(impulse);
  REQUIRE(bands.size() == 8);

  std::vector<double> sum(impulse.size(), 0.0);
  for (const auto& b : bands)
    for (std::size_t i = 0; i < b.size(); ++i) sum[i] += b[i];

  // Flat magnitude across 100 Hz - 10 kHz within +-0.5 dB.
  for (double hz = 100.0; hz <= 10000.0; hz *= 1.1) {
    const double mag = spectrum_mag_at(sum, hz, kRate);
    CHECK(std::abs(20.0 * std::log10(mag)) < 0.5);
  }
}

TEST_CASE("band prototype is concentrated in its own band") {
  // LR4 transitions at octave spacing are wide; a band owns the spectrum
  // out to its neighbors' centers (DC / Nyquist at the edges).
  const auto centers = default_band_centers();
  const filters::KernelBank bank(centers, kRate);
  for (int b = 0; b < bank.band_count(); ++b) {
    const auto& proto = bank.prototype(b);
    const std::size_t n = dsp::next_pow2(proto.size());
    auto spec = dsp::fft_real(proto, n);

    const auto bi = static_cast<std::size_t>(b);
    const double lo = bi == 0 ? 0.0 : centers[bi - 1];
    const double hi =
        bi + 1 < centers.size() ? centers[bi + 1] : kRate / 2.0;
    double in_band = 0.0, total = 0.0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
      const double hz = static_cast<double>(k) * kRate / n;
      const double p = std::norm(spec[k]);
      total += p;
      if (hz >= lo && hz <= hi) in_band += p;
    }
    CHECK(in_band / total > 0.9);
  }
}

TEST_CASE("prototypes have unit energy") {
  const filters::KernelBank bank(default_band_centers(), kRate);
  for (int b = 0; b < bank.band_count(); ++b) {
    double e = 0.0;
    for (double v : bank.prototype(b)) e += v * v;
    CHECK(e == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("deposit carries the requested energy") {
  const filters::KernelBank bank(default_band_centers(), kRate);
  for (const auto& energy : std::vector<std::vector<double>>{
           {0.1, 0.0, 0.4, 0.0, 0.25, 0.0, 0.05, 0.2},
           {1, 1, 1, 1, 1, 1, 1, 1},
           {0, 0, 0, 1, 0, 0, 0, 0}}) {
    std::vector<double> out;
    bank.deposit(out, 100, energy);

    double total = 0.0;
    for (double v : out) total += v * v;
    double expected = 0.0;
    for (double e : energy) expected += e;
    CHECK(total == doctest::Approx(expected).epsilon(1e-9));
    // Nothing before the deposit offset.
    for (std::size_t i = 0; i < 100; ++i) CHECK(out[i] == 0.0);
  }
}
