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

#include "roomtone/erdur.hpp"

#include <algorithm>
#include <cmath>

namespace roomtone::erdur {

std::vector<double> expected_zenith_cdf(std::span<const double> edges) {
  std::vector<double> out;
  out.reserve(edges.size());
  double prev = -1.0;
  for (double e : edges) {
    if (e < -1e-12 || e > kPi + 1e-12)
      throw InputError("expected_zenith_cdf: edge outside [0, pi]");
    if (e <= prev)
      throw InputError("expected_zenith_cdf: edges must increase");
    prev = e;
    out.push_back(0.5 * (1.0 - std::cos(e)));
  }
  return out;
}

double ks_distance(std::span<const double> empirical,
                   std::span<const double> expected) {
  if (empirical.size() != expected.size())
    throw InputError("ks_distance: CDF lengths differ");
  double d = 0.0;
  for (std::size_t i = 0; i < empirical.size(); ++i)
    d = std::max(d, std::abs(empirical[i] - expected[i]));
  return d;
}

namespace {

// Direction -> (zenith from +z, azimuth in [0, 2pi)).
std::pair<double, double> angles_of(const Vec3& dir) {
  const double zenith = std::acos(std::clamp(dir.z, -1.0, 1.0));
  double azimuth = std::atan2(dir.y, dir.x);
  if (azimuth < 0.0) azimuth += 2.0 * kPi;
  return {zenith, azimuth};
}

std::vector<double> cumulative(const std::vector<double>& hist) {
  std::vector<double> cdf(hist.size(), 0.0);
  double total = 0.0;
  for (double v : hist) total += v;
  double acc = 0.0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    acc += hist[i];
    cdf[i] = total > 0.0 ? acc / total : 0.0;
  }
  return cdf;
}

}  // namespace

WindowDistances window_distances(const PathSet& paths, double start,
                                 double window) {
  WindowDistances out;
  out.start = start;

  std::vector<double> zen_hist(kZenithBins, 0.0);
  std::vector<double> azi_hist(kAzimuthBins, 0.0);
  for (const auto& path : paths.paths) {
    if (path.arrival_time < start || path.arrival_time >= start + window)
      continue;
    double energy = 0.0;
    for (double e : path.band_energy) energy += e;
    if (energy <= 0.0) continue;
    const auto [zenith, azimuth] = angles_of(path.direction);
    const int zb = std::min(kZenithBins - 1,
                            static_cast<int>(zenith / kPi * kZenithBins));
    const int ab =
        std::min(kAzimuthBins - 1,
                 static_cast<int>(azimuth / (2.0 * kPi) * kAzimuthBins));
    zen_hist[static_cast<std::size_t>(zb)] += energy;
    azi_hist[static_cast<std::size_t>(ab)] += energy;
    ++out.sample_count;
  }
  if (out.sample_count == 0) return out;  // distances stay at 1

  std::vector<double> zen_edges(kZenithBins);
  for (int i = 0; i < kZenithBins; ++i)
    zen_edges[static_cast<std::size_t>(i)] =
        kPi * static_cast<double>(i + 1) / kZenithBins;
  const auto zen_expected = expected_zenith_cdf(zen_edges);
  // Azimuth is uniform on [0, 2pi): the expected CDF is linear.
  std::vector<double> azi_expected(kAzimuthBins);
  for (int i = 0; i < kAzimuthBins; ++i)
    azi_expected[static_cast<std::size_t>(i)] =
        static_cast<double>(i + 1) / kAzimuthBins;

  out.d_zenith = ks_distance(cumulative(zen_hist), zen_expected);
  out.d_azimuth = ks_distance(cumulative(azi_hist), azi_expected);
  return out;
}

std::optional<ErResult> find_er_duration(const PathSet& paths, double window,
                                         double threshold, double horizon) {
  if (paths.paths.empty())
    throw InputError("find_er_duration: empty path set");
  if (window <= 0.0) throw InputError("find_er_duration: window must be > 0");

  const double first = paths.paths.front().arrival_time;
  ErResult result;
  for (int i = 0;; ++i) {
    const double start = first + 0.5 * window * i;
    if (start > horizon) break;
    const auto d = window_distances(paths, start, window);
    result.windows.push_back(d);
    if (d.d_zenith <= threshold && d.d_azimuth <= threshold) {
      result.t_er = start;
      result.pass_window_index = i;
      return result;
    }
  }
  return std::nullopt;
}

}  // namespace roomtone::erdur
