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

#include "roomtone/dsp.hpp"

#include <algorithm>
#include <cmath>

namespace roomtone::dsp {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0) return;
  if ((n & (n - 1)) != 0)
    throw NumericError("fft: size must be a power of two");

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) *
                       (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = data[i + k];
        std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& c : data) c *= inv_n;
  }
}

std::vector<std::complex<double>> fft_real(const std::vector<double>& x,
                                           std::size_t size) {
  std::vector<std::complex<double>> buf(size);
  const std::size_t m = std::min(size, x.size());
  for (std::size_t i = 0; i < m; ++i) buf[i] = x[i];
  fft(buf, false);
  return buf;
}

namespace {

// Single-block FFT convolution of raw buffers.
std::vector<double> convolve_block(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  auto fa = fft_real(a, n);
  auto fb = fft_real(b, n);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft(fa, true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
  return out;
}

}  // namespace

std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};

  const std::vector<double>& sig = a.size() >= b.size() ? a : b;
  const std::vector<double>& ker = a.size() >= b.size() ? b : a;
  const std::size_t out_len = sig.size() + ker.size() - 1;

  // Small enough for one transform.
  if (out_len <= (1u << 18)) return convolve_block(sig, ker);

  // Overlap-add: block size a few times the kernel length.
  const std::size_t fft_n =
      next_pow2(std::max<std::size_t>(4 * ker.size(), 1u << 14));
  const std::size_t block = fft_n - ker.size() + 1;

  auto fk = fft_real(ker, fft_n);
  std::vector<double> out(out_len, 0.0);
  std::vector<std::complex<double>> buf(fft_n);
  for (std::size_t start = 0; start < sig.size(); start += block) {
    const std::size_t len = std::min(block, sig.size() - start);
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < len; ++i) buf[i] = sig[start + i];
    fft(buf, false);
    for (std::size_t i = 0; i < fft_n; ++i) buf[i] *= fk[i];
    fft(buf, true);
    const std::size_t tail = std::min(len + ker.size() - 1, out_len - start);
    for (std::size_t i = 0; i < tail; ++i) out[start + i] += buf[i].real();
  }
  return out;
}

Signal fft_convolve(const Signal& a, const Signal& b) {
  if (a.rate != b.rate)
    throw InputError("fft_convolve: sample rates differ");
  Signal out;
  out.rate = a.rate;
  out.samples = convolve(a.samples, b.samples);
  return out;
}

namespace {

double bessel_i0(double x) {
  // Series expansion; converges quickly for the window arguments used here.
  double sum = 1.0, term = 1.0;
  const double x2 = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= x2 / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace

Signal resample(const Signal& in, double new_rate) {
  if (new_rate <= 0.0) throw InputError("resample: rate must be positive");
  if (in.rate == new_rate || in.samples.empty()) {
    Signal out = in;
    out.rate = new_rate;
    return out;
  }

  const double ratio = new_rate / in.rate;
  const double cutoff = 0.5 * std::min(1.0, ratio);  // in input-rate units
  const int half_width =
      static_cast<int>(std::ceil(32.0 / std::min(1.0, ratio)));
  const double beta = 8.0;
  const double inv_i0 = 1.0 / bessel_i0(beta);

  const std::size_t out_len = static_cast<std::size_t>(
      std::ceil(static_cast<double>(in.samples.size()) * ratio));
  Signal out;
  out.rate = new_rate;
  out.samples.assign(out_len, 0.0);

  const auto& x = in.samples;
  const long n_in = static_cast<long>(x.size());
  for (std::size_t n = 0; n < out_len; ++n) {
    const double center = static_cast<double>(n) / ratio;
    const long k0 = static_cast<long>(std::floor(center)) - half_width + 1;
    const long k1 = static_cast<long>(std::floor(center)) + half_width;
    double acc = 0.0;
    for (long k = std::max(0L, k0); k <= std::min(n_in - 1, k1); ++k) {
      const double t = center - static_cast<double>(k);
      const double u = t / half_width;
      if (u <= -1.0 || u >= 1.0) continue;
      const double sinc =
          t == 0.0 ? 2.0 * cutoff
                   : std::sin(2.0 * kPi * cutoff * t) / (kPi * t);
      const double win = bessel_i0(beta * std::sqrt(1.0 - u * u)) * inv_i0;
      acc += x[k] * sinc * win;
    }
    out.samples[n] = acc;
  }
  return out;
}

double total_energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

}  // namespace roomtone::dsp
