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

#include "roomtone/ambi.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "roomtone/dsp.hpp"

namespace roomtone::ambi {

SphericalDirection direction_of(const Vec3& v) {
  const Vec3 u = normalized(v);
  SphericalDirection d;
  d.elevation = std::asin(std::clamp(u.z, -1.0, 1.0));
  d.azimuth = std::atan2(u.y, u.x);
  if (d.azimuth < 0.0) d.azimuth += 2.0 * kPi;
  return d;
}

namespace {

// Associated Legendre without the Condon-Shortley phase (ambisonic usage).
double legendre(int n, int m, double x) {
  double pmm = 1.0;
  if (m > 0) {
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= fact * s;
      fact += 2.0;
    }
  }
  if (n == m) return pmm;
  double pmm1 = x * (2.0 * m + 1.0) * pmm;
  if (n == m + 1) return pmm1;
  double p = 0.0;
  for (int l = m + 2; l <= n; ++l) {
    p = ((2.0 * l - 1.0) * x * pmm1 - (l + m - 1.0) * pmm) / (l - m);
    pmm = pmm1;
    pmm1 = p;
  }
  return p;
}

double factorial_ratio(int n, int m) {
  // (n - m)! / (n + m)!
  double r = 1.0;
  for (int k = n - m + 1; k <= n + m; ++k) r /= k;
  return r;
}

}  // namespace

double real_sh(int n, int m, const SphericalDirection& dir) {
  if (n < 0 || std::abs(m) > n) throw InputError("real_sh: invalid (n, m)");
  if (n == 0) return 1.0 / std::sqrt(2.0);  // omnidirectional gain convention

  const int am = std::abs(m);
  const double x = std::sin(dir.elevation);
  // SN3D: sqrt((2 - delta_m0) (n-|m|)!/(n+|m|)!).
  const double norm_c =
      std::sqrt((m == 0 ? 1.0 : 2.0) * factorial_ratio(n, am));
  const double p = legendre(n, am, x);
  if (m > 0) return norm_c * p * std::cos(am * dir.azimuth);
  if (m < 0) return norm_c * p * std::sin(am * dir.azimuth);
  return norm_c * p;
}

AmbisonicBuffer AmbisonicBuffer::zeros(int order, double rate,
                                       std::size_t length) {
  if (order < 0) throw InputError("AmbisonicBuffer: negative order");
  AmbisonicBuffer b;
  b.order = order;
  b.rate = rate;
  b.channels.assign(static_cast<std::size_t>((order + 1) * (order + 1)),
                    std::vector<double>(length, 0.0));
  return b;
}

AmbisonicBuffer encode_er(
    const Signal& dry, const std::vector<irsynth::DirectionalIrEntry>& entries,
    int order) {
  if (dry.samples.empty()) throw InputError("encode_er: empty dry signal");
  std::size_t max_kernel = 1;
  for (const auto& e : entries) {
    if (e.kernel.rate != dry.rate)
      throw InputError("encode_er: kernel rate differs from dry rate");
    max_kernel = std::max(max_kernel, std::max<std::size_t>(
                                          1, e.kernel.samples.size()));
  }

  const std::size_t out_len = dry.samples.size() + max_kernel - 1;
  AmbisonicBuffer buf = AmbisonicBuffer::zeros(order, dry.rate, out_len);

  // Accumulate a per-channel impulse response first, then convolve once per
  // channel; identical to per-entry convolution by linearity.
  const int nch = buf.channel_count();
  for (int ch = 0; ch < nch; ++ch) {
    const int n = static_cast<int>(std::floor(std::sqrt(ch)));
    const int m = ch - n * n - n;
    std::vector<double> channel_ir(max_kernel, 0.0);
    bool any = false;
    for (const auto& e : entries) {
      const double gain = real_sh(n, m, direction_of(e.direction));
      if (gain == 0.0) continue;
      for (std::size_t i = 0; i < e.kernel.samples.size(); ++i)
        channel_ir[i] += gain * e.kernel.samples[i];
      any = true;
    }
    if (!any) continue;
    const auto wet = dsp::convolve(dry.samples, channel_ir);
    auto& out = buf.channels[static_cast<std::size_t>(ch)];
    for (std::size_t i = 0; i < wet.size() && i < out.size(); ++i)
      out[i] = wet[i];
  }
  return buf;
}

void encode_lr(const Signal& dry, const Signal& tail, AmbisonicBuffer& buffer) {
  if (dry.rate != tail.rate || dry.rate != buffer.rate)
    throw InputError("encode_lr: sample rates differ");
  if (tail.samples.empty()) return;

  const auto wet = dsp::convolve(dry.samples, tail.samples);
  if (buffer.channels.empty())
    throw InputError("encode_lr: buffer has no channels");
  if (wet.size() > buffer.channels[0].size())
    for (auto& c : buffer.channels) c.resize(wet.size(), 0.0);
  const double w_gain = 1.0 / std::sqrt(2.0);
  auto& w = buffer.channels[0];
  for (std::size_t i = 0; i < wet.size(); ++i) w[i] += w_gain * wet[i];
}

Signal decode_to_direction(const AmbisonicBuffer& buffer,
                           const SphericalDirection& dir) {
  Signal out;
  out.rate = buffer.rate;
  if (buffer.channels.empty()) return out;
  out.samples.assign(buffer.channels[0].size(), 0.0);
  for (int ch = 0; ch < buffer.channel_count(); ++ch) {
    const int n = static_cast<int>(std::floor(std::sqrt(ch)));
    const int m = ch - n * n - n;
    const double gain = real_sh(n, m, dir);
    const auto& c = buffer.channels[static_cast<std::size_t>(ch)];
    for (std::size_t i = 0; i < out.samples.size(); ++i)
      out.samples[i] += gain * c[i];
  }
  return out;
}

void to_sn3d(AmbisonicBuffer& buffer) {
  if (buffer.channels.empty()) return;
  const double g = std::sqrt(2.0);  // W: 1/sqrt(2) -> 1
  for (double& v : buffer.channels[0]) v *= g;
}

double limit_peak(AmbisonicBuffer& buffer, double limit) {
  double peak = 0.0;
  for (const auto& c : buffer.channels)
    for (double v : c) peak = std::max(peak, std::abs(v));
  if (peak <= limit || peak <= 0.0) return 1.0;
  const double gain = limit / peak;
  for (auto& c : buffer.channels)
    for (double& v : c) v *= gain;
  return gain;
}

std::vector<TrajectorySample> sample_positions(const Trajectory& trajectory,
                                               double spacing) {
  if (trajectory.samples.empty())
    throw InputError("sample_positions: empty trajectory");
  std::vector<TrajectorySample> out;
  out.push_back(trajectory.samples.front());
  if (trajectory.samples.size() == 1) return out;

  double next_arc = spacing;
  double arc = 0.0;
  for (std::size_t i = 1; i < trajectory.samples.size(); ++i) {
    const auto& a = trajectory.samples[i - 1];
    const auto& b = trajectory.samples[i];
    const double seg = norm(b.position - a.position);
    while (seg > 0.0 && arc + seg >= next_arc) {
      const double f = (next_arc - arc) / seg;
      TrajectorySample s;
      s.t = a.t + f * (b.t - a.t);
      s.position = a.position + (b.position - a.position) * f;
      // nlerp is plenty for sidecar metadata
      Quat q{a.orientation.w + f * (b.orientation.w - a.orientation.w),
             a.orientation.x + f * (b.orientation.x - a.orientation.x),
             a.orientation.y + f * (b.orientation.y - a.orientation.y),
             a.orientation.z + f * (b.orientation.z - a.orientation.z)};
      const double qn = q.norm();
      if (qn > 0.0) {
        q.w /= qn;
        q.x /= qn;
        q.y /= qn;
        q.z /= qn;
      }
      s.orientation = q;
      out.push_back(s);
      next_arc += spacing;
    }
    arc += seg;
  }
  return out;
}

double crossfade_weight(double t, std::size_t segment,
                        const std::vector<double>& boundaries, double fade) {
  auto ramp_down = [fade](double time, double boundary) {
    // 1 before the fade, raised-cosine to 0 across it.
    const double u = (time - (boundary - 0.5 * fade)) / fade;
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * u));
  };
  double w = 1.0;
  if (segment > 0) w *= 1.0 - ramp_down(t, boundaries[segment - 1]);
  if (segment < boundaries.size()) w *= ramp_down(t, boundaries[segment]);
  return w;
}

AmbisonicBuffer render_trajectory(const Signal& dry,
                                  const Trajectory& trajectory,
                                  const Scene& scene,
                                  const ImpulseResponse& measured_ir,
                                  double t_er, const RenderOptions& opts) {
  if (trajectory.samples.empty())
    throw InputError("render_trajectory: empty trajectory");
  if (dry.samples.empty())
    throw InputError("render_trajectory: empty dry signal");

  const auto positions = sample_positions(trajectory, opts.spacing);
  const std::size_t n_seg = positions.size();

  // Per-position directional IRs; a failure reports the position index.
  std::vector<irsynth::DirectionalIr> irs(n_seg);
  irsynth::SynthesisOptions synth;
  synth.ray_budget = opts.ray_budget;
  synth.rate = dry.rate;
  synth.tail_window = opts.tail_window;
  synth.trace = opts.trace;
  synth.modulation = opts.modulation;
  for (std::size_t k = 0; k < n_seg; ++k) {
    synth.seed = opts.seed + k;
    try {
      irs[k] = irsynth::synthesize_directional_ir(
          scene, opts.source, positions[k].position, measured_ir, t_er, synth);
    } catch (const std::exception& e) {
      throw NumericError("render_trajectory: synthesis failed at position " +
                         std::to_string(k) + ": " + e.what());
    }
  }

  // Segment boundaries at time midpoints between adjacent positions.
  std::vector<double> boundaries;
  for (std::size_t k = 0; k + 1 < n_seg; ++k)
    boundaries.push_back(0.5 * (positions[k].t + positions[k + 1].t));

  AmbisonicBuffer out = AmbisonicBuffer::zeros(opts.order, dry.rate, 1);
  for (std::size_t k = 0; k < n_seg; ++k) {
    Signal piece;
    piece.rate = dry.rate;
    if (n_seg == 1) {
      piece.samples = dry.samples;
    } else {
      piece.samples.resize(dry.samples.size());
      for (std::size_t i = 0; i < dry.samples.size(); ++i) {
        const double t = static_cast<double>(i) / dry.rate;
        piece.samples[i] =
            dry.samples[i] *
            crossfade_weight(t, k, boundaries, std::max(1e-6, opts.crossfade));
      }
    }

    AmbisonicBuffer seg = encode_er(piece, irs[k].entries, opts.order);
    encode_lr(piece, irs[k].lr_tail, seg);

    if (seg.channels[0].size() > out.channels[0].size())
      for (auto& c : out.channels) c.resize(seg.channels[0].size(), 0.0);
    for (std::size_t ch = 0; ch < out.channels.size(); ++ch)
      for (std::size_t i = 0; i < seg.channels[ch].size(); ++i)
        out.channels[ch][i] += seg.channels[ch][i];
  }
  return out;
}

}  // namespace roomtone::ambi
