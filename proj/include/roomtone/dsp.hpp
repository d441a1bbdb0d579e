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

#include <complex>
#include <vector>

#include "roomtone/core.hpp"

namespace roomtone::dsp {

/// Smallest power of two >= n (n >= 1).
std::size_t next_pow2(std::size_t n);

/// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data, bool inverse);

/// Forward FFT of a real signal zero-padded to `size` (power of two).
std::vector<std::complex<double>> fft_real(const std::vector<double>& x,
                                           std::size_t size);

/// Full linear convolution, length |a|+|b|-1. Long inputs go through
/// overlap-add partitioning; the result is independent of partition size.
Signal fft_convolve(const Signal& a, const Signal& b);

/// Convolution of raw sample buffers (rate-agnostic helper).
std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& b);

/// Windowed-sinc resampler (Kaiser window, ~90 dB stopband). Returns the
/// input unchanged when the rates already match.
Signal resample(const Signal& in, double new_rate);

double total_energy(const std::vector<double>& x);

}  // namespace roomtone::dsp
