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

#include <cmath>

#include "doctest.h"
#include "roomtone/dsp.hpp"
#include "roomtone/rng.hpp"
#include "support.hpp"

using namespace roomtone;
using roomtone::testing::make_shoebox;
using roomtone::testing::uniform_material;

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration; plenty of
// accuracy for low-order spherical polynomials.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
        break;
      }
    }
  }
}

Signal delta_signal(double rate = 48000.0) {
  Signal s;
  s.rate = rate;
  s.samples = {1.0};
  return s;
}

irsynth::DirectionalIrEntry entry_at(const Vec3& dir, double rate = 48000.0) {
  irsynth::DirectionalIrEntry e;
  e.direction = dir;
  e.kernel = delta_signal(rate);
  return e;
}

}  // namespace

TEST_CASE("first-order basis values") {
  using ambi::real_sh;
  ambi::SphericalDirection any{1.234, -0.5};
  CHECK(real_sh(0, 0, any) == doctest::Approx(1.0 / std::sqrt(2.0)));

  // Straight up: X = Y = 0, Z = 1.
  ambi::SphericalDirection up{0.0, kPi / 2.0};
  CHECK(real_sh(1, 1, up) == doctest::Approx(0.0).epsilon(1e-12));   // X
  CHECK(real_sh(1, -1, up) == doctest::Approx(0.0).epsilon(1e-12));  // Y
  CHECK(real_sh(1, 0, up) == doctest::Approx(1.0));                  // Z

  // +x axis: X = 1, others 0.
  ambi::SphericalDirection px{0.0, 0.0};
  CHECK(real_sh(1, 1, px) == doctest::Approx(1.0));
  CHECK(real_sh(1, -1, px) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(real_sh(1, 0, px) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(real_sh(1, 2, any), InputError);
}

TEST_CASE("spherical harmonics are orthogonal under sphere quadrature") {
  // Gauss-Legendre in cos(zenith) x uniform azimuth, ~10^4 points: exact
  // for these low-degree polynomials up to rounding.
  std::vector<double> nodes, weights;
  const int n_polar = 50, n_azimuth = 200;
  gauss_legendre(n_polar, nodes, weights);

  const int max_order = 3;
  std::vector<std::pair<int, int>> nm;
  for (int n = 0; n <= max_order; ++n)
    for (int m = -n; m <= n; ++m) nm.emplace_back(n, m);

  for (std::size_t a = 0; a < nm.size(); ++a) {
    for (std::size_t b = a; b < nm.size(); ++b) {
      double acc = 0.0;
      for (int i = 0; i < n_polar; ++i) {
        const double el = std::asin(nodes[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n_azimuth; ++j) {
          const double az = 2.0 * kPi * j / n_azimuth;
          const ambi::SphericalDirection d{az, el};
          acc += weights[static_cast<std::size_t>(i)] *
                 ambi::real_sh(nm[a].first, nm[a].second, d) *
                 ambi::real_sh(nm[b].first, nm[b].second, d);
        }
      }
      acc *= 2.0 * kPi / n_azimuth;
      if (a == b) {
        // SN3D self-inner-product: 4 pi / (2n+1); the order-0 channel
        // carries the 1/sqrt(2) gain instead.
        const int n = nm[a].first;
        const double expect =
            n == 0 ? 2.0 * kPi : 4.0 * kPi / (2.0 * n + 1.0);
        CHECK(acc == doctest::Approx(expect).epsilon(1e-6));
      } else {
        CHECK(std::abs(acc) < 1e-3);
      }
    }
  }
}

TEST_CASE("encode_er basics") {
  const Signal dry{{1.0, 0.5, -0.25}, 48000.0};

  SUBCASE("overhead delta entry fills W and Z only") {
    const auto buf = ambi::encode_er(dry, {entry_at({0, 0, 1})}, 1);
    REQUIRE(buf.channel_count() == 4);
    for (std::size_t i = 0; i < dry.samples.size(); ++i) {
      CHECK(buf.channels[0][i] ==
            doctest::Approx(dry.samples[i] / std::sqrt(2.0)).epsilon(1e-12));
      CHECK(std::abs(buf.channels[1][i]) < 1e-12);  // Y
      CHECK(buf.channels[2][i] ==
            doctest::Approx(dry.samples[i]).epsilon(1e-12));  // Z
      CHECK(std::abs(buf.channels[3][i]) < 1e-12);  // X
    }
  }
  SUBCASE("two identical entries double the buffer") {
    const auto one = ambi::encode_er(dry, {entry_at({1, 0, 0})}, 1);
    const auto two = ambi::encode_er(
        dry, {entry_at({1, 0, 0}), entry_at({1, 0, 0})}, 1);
    for (int ch = 0; ch < 4; ++ch)
      for (std::size_t i = 0; i < one.channels[0].size(); ++i)
        CHECK(two.channels[ch][i] ==
              doctest::Approx(2.0 * one.channels[ch][i]).epsilon(1e-12));
  }
  SUBCASE("matches the naive per-sample loop oracle") {
    Rng rng(41);
    Signal noise;
    noise.rate = 48000.0;
    noise.samples.resize(64);
    for (auto& v : noise.samples) v = rng.uniform(-1.0, 1.0);

    std::vector<irsynth::DirectionalIrEntry> entries;
    for (int e = 0; e < 5; ++e) {
      irsynth::DirectionalIrEntry en;
      en.direction = rng.unit_sphere();
      en.kernel.rate = 48000.0;
      en.kernel.samples.resize(16);
      for (auto& v : en.kernel.samples) v = rng.uniform(-1.0, 1.0);
      entries.push_back(en);
    }
    const int order = 2;
    const auto fast = ambi::encode_er(noise, entries, order);

    // Naive: per entry, per channel, direct convolution sample by sample.
    std::vector<std::vector<double>> slow(
        9, std::vector<double>(noise.samples.size() + 15, 0.0));
    for (const auto& en : entries) {
      const auto d = ambi::direction_of(en.direction);
      for (int n = 0; n <= order; ++n)
        for (int m = -n; m <= n; ++m) {
          const double g = ambi::real_sh(n, m, d);
          auto& ch = slow[static_cast<std::size_t>(ambi::acn_index(n, m))];
          for (std::size_t i = 0; i < noise.samples.size(); ++i)
            for (std::size_t j = 0; j < en.kernel.samples.size(); ++j)
              ch[i + j] += g * noise.samples[i] * en.kernel.samples[j];
        }
    }
    for (int ch = 0; ch < 9; ++ch)
      CHECK(roomtone::testing::rms_diff(
                fast.channels[static_cast<std::size_t>(ch)],
                slow[static_cast<std::size_t>(ch)]) < 1e-9);
  }
  SUBCASE("kernel rate mismatch is rejected") {
    auto e = entry_at({1, 0, 0}, 44100.0);
    CHECK_THROWS_AS(ambi::encode_er(dry, {e}, 1), InputError);
  }
}

TEST_CASE("encode_lr") {
  const Signal dry{{1.0, -0.5}, 48000.0};
  auto buf = ambi::encode_er(dry, {entry_at({0, 1, 0})}, 1);
  const auto before = buf;

  SUBCASE("silent tail changes nothing") {
    Signal tail;
    tail.rate = 48000.0;
    ambi::encode_lr(dry, tail, buf);
    for (int ch = 0; ch < 4; ++ch)
      CHECK(buf.channels[ch] == before.channels[ch]);
  }
  SUBCASE("delta dry and tail put 1/sqrt2 into W, leaving XYZ bit-identical") {
    const Signal tail{{1.0}, 48000.0};
    ambi::encode_lr(dry, tail, buf);
    for (std::size_t i = 0; i < dry.samples.size(); ++i)
      CHECK(buf.channels[0][i] ==
            doctest::Approx(before.channels[0][i] +
                            dry.samples[i] / std::sqrt(2.0)));
    for (int ch = 1; ch < 4; ++ch)
      CHECK(buf.channels[ch] == before.channels[ch]);
  }
  SUBCASE("added W energy is exactly half the late signal energy") {
    auto zero = ambi::AmbisonicBuffer::zeros(1, 48000.0, 4);
    const Signal tail{{1.0}, 48000.0};
    ambi::encode_lr(dry, tail, zero);
    CHECK(dsp::total_energy(zero.channels[0]) ==
          doctest::Approx(0.5 * dsp::total_energy(dry.samples))
              .epsilon(1e-12));
  }
}

TEST_CASE("decode probe") {
  const Signal dry{{1.0, 0.3, 0.1, -0.2}, 48000.0};
  const Vec3 dir{0.5, -0.5, std::sqrt(0.5)};

  SUBCASE("probing toward the source beats probing away") {
    const auto buf = ambi::encode_er(dry, {entry_at(dir)}, 1);
    const auto toward =
        ambi::decode_to_direction(buf, ambi::direction_of(dir));
    const auto away =
        ambi::decode_to_direction(buf, ambi::direction_of(dir * -1.0));
    CHECK(dsp::total_energy(toward.samples) >
          dsp::total_energy(away.samples));
  }
  SUBCASE("W-only buffer probes identically everywhere") {
    auto buf = ambi::AmbisonicBuffer::zeros(1, 48000.0, 4);
    buf.channels[0] = {1.0, 0.5, 0.25, 0.125};
    Rng rng(55);
    const auto ref =
        ambi::decode_to_direction(buf, ambi::direction_of(rng.unit_sphere()));
    for (int i = 0; i < 5; ++i) {
      const auto probe = ambi::decode_to_direction(
          buf, ambi::direction_of(rng.unit_sphere()));
      for (std::size_t s = 0; s < ref.samples.size(); ++s)
        CHECK(probe.samples[s] == doctest::Approx(ref.samples[s]));
    }
  }
  SUBCASE("probe is linear over buffer sums") {
    const auto a = ambi::encode_er(dry, {entry_at({1, 0, 0})}, 1);
    const auto b = ambi::encode_er(dry, {entry_at({0, 0, 1})}, 1);
    auto sum = a;
    for (int ch = 0; ch < 4; ++ch)
      for (std::size_t i = 0; i < sum.channels[ch].size(); ++i)
        sum.channels[ch][i] += b.channels[ch][i];
    const ambi::SphericalDirection d{0.3, 0.4};
    const auto pa = ambi::decode_to_direction(a, d);
    const auto pb = ambi::decode_to_direction(b, d);
    const auto ps = ambi::decode_to_direction(sum, d);
    for (std::size_t i = 0; i < ps.samples.size(); ++i)
      CHECK(ps.samples[i] ==
            doctest::Approx(pa.samples[i] + pb.samples[i]).epsilon(1e-12));
  }
}

TEST_CASE("isotropic entries leave XYZ well below W") {
  Rng rng(83);
  std::vector<irsynth::DirectionalIrEntry> entries;
  for (int i = 0; i < 10000; ++i) entries.push_back(entry_at(rng.unit_sphere()));
  const auto buf = ambi::encode_er(delta_signal(), entries, 1);
  const double w = dsp::total_energy(buf.channels[0]);
  for (int ch = 1; ch < 4; ++ch)
    CHECK(dsp::total_energy(buf.channels[ch]) < 0.01 * w);
}

TEST_CASE("crossfade weights form a partition of unity") {
  const std::vector<double> boundaries = {1.0, 2.0, 3.5};
  const double fade = 0.05;
  for (double t = 0.0; t < 4.5; t += 0.001) {
    double sum = 0.0;
    for (std::size_t k = 0; k < 4; ++k)
      sum += ambi::crossfade_weight(t, k, boundaries, fade);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sample_positions spaces by arc length") {
  Trajectory traj;
  traj.samples.push_back({0.0, {0, 0, 0}, {1, 0, 0, 0}});
  traj.samples.push_back({2.0, {1.2, 0, 0}, {1, 0, 0, 0}});
  const auto pos = ambi::sample_positions(traj, 0.5);
  REQUIRE(pos.size() == 3);  // arc 0, 0.5, 1.0
  CHECK(pos[1].position.x == doctest::Approx(0.5));
  CHECK(pos[2].position.x == doctest::Approx(1.0));
  CHECK(pos[1].t == doctest::Approx(2.0 * 0.5 / 1.2));
}

TEST_CASE("render_trajectory") {
  Material m;
  m.name = "walls";
  m.reflectance = std::vector<double>(8, 0.15);  // dry room: direct dominates
  Scene box = make_shoebox(6, 8, 3, {m});

  // Synthetic measured IR: exponential noise tail after the direct spike.
  ImpulseResponse measured;
  measured.rate = 48000.0;
  measured.samples.assign(static_cast<std::size_t>(0.3 * 48000), 0.0);
  Rng rng(7);
  const std::size_t onset = 400;
  measured.samples[onset] = 1.0;
  for (std::size_t i = onset + 1; i < measured.samples.size(); ++i) {
    const double t = static_cast<double>(i - onset) / 48000.0;
    measured.samples[i] = 0.2 * rng.gaussian() * std::exp(-20.0 * t);
  }
  measured.first_arrival = static_cast<double>(onset) / 48000.0;

  Signal dry;
  dry.rate = 48000.0;
  dry.samples.resize(4800);
  for (std::size_t i = 0; i < dry.samples.size(); ++i)
    dry.samples[i] = std::sin(2.0 * kPi * 440.0 * i / 48000.0);

  const double t_er = 0.04;

  SUBCASE("stationary trajectory equals the single-position encode") {
    Trajectory stay;
    stay.samples.push_back({0.0, {3, 2, 1.5}, {1, 0, 0, 0}});
    stay.samples.push_back({1.0, {3, 2, 1.5}, {1, 0, 0, 0}});

    ambi::RenderOptions opts;
    opts.source = {3, 6, 1.5};
    opts.ray_budget = 4000;
    opts.seed = 9;
    const auto traj_buf =
        ambi::render_trajectory(dry, stay, box, measured, t_er, opts);

    irsynth::SynthesisOptions synth;
    synth.ray_budget = 4000;
    synth.seed = 9;
    synth.rate = 48000.0;
    const auto ir = irsynth::synthesize_directional_ir(
        box, opts.source, {3, 2, 1.5}, measured, t_er, synth);
    auto direct_buf = ambi::encode_er(dry, ir.entries, 1);
    ambi::encode_lr(dry, ir.lr_tail, direct_buf);

    REQUIRE(traj_buf.channels[0].size() == direct_buf.channels[0].size());
    for (int ch = 0; ch < 4; ++ch)
      CHECK(roomtone::testing::rms_diff(traj_buf.channels[ch],
                                        direct_buf.channels[ch]) < 1e-12);
  }

  SUBCASE("walking past the source flips the lateral channel") {
    Trajectory walk;
    walk.samples.push_back({0.0, {3, 1.0, 1.5}, {1, 0, 0, 0}});
    walk.samples.push_back({2.0, {3, 7.0, 1.5}, {1, 0, 0, 0}});
    ambi::RenderOptions opts;
    opts.source = {3.6, 4, 1.5};  // just off the walking line
    opts.ray_budget = 1500;
    opts.seed = 4;

    Signal long_dry;
    long_dry.rate = 48000.0;
    long_dry.samples.assign(2 * 48000, 0.0);
    Rng r2(3);
    for (auto& v : long_dry.samples) v = r2.uniform(-1.0, 1.0);

    const auto buf =
        ambi::render_trajectory(long_dry, walk, box, measured, t_er, opts);
    // Correlate the Y channel (world y) against W early vs late.
    const std::size_t n = 48000;
    double early = 0.0, late = 0.0;
    for (std::size_t i = 0; i < n / 2; ++i)
      early += buf.channels[1][i] * buf.channels[0][i];
    for (std::size_t i = buf.channels[0].size() - n;
         i < buf.channels[0].size() - n / 2; ++i)
      late += buf.channels[1][i] * buf.channels[0][i];
    CHECK(early > 0.0);  // source ahead in +y
    CHECK(late < 0.0);   // source behind in -y
  }
}

TEST_CASE("sn3d renormalization scales only W") {
  const Signal dry{{1.0}, 48000.0};
  auto buf = ambi::encode_er(dry, {entry_at({0, 1, 0})}, 1);
  const auto before = buf;
  ambi::to_sn3d(buf);
  CHECK(buf.channels[0][0] ==
        doctest::Approx(before.channels[0][0] * std::sqrt(2.0)));
  for (int ch = 1; ch < 4; ++ch) CHECK(buf.channels[ch] == before.channels[ch]);
}
