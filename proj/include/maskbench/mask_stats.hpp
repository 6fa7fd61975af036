/**
 * Copyright 2026 The maskbench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MASKBENCH_MASK_STATS_HPP
#define MASKBENCH_MASK_STATS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "maskbench/masks.hpp"
#include "maskbench/signal.hpp"

namespace maskbench::masks {

constexpr std::size_t kAngleBuckets = 36;
constexpr std::size_t kMaxScatterPoints = 50000;
constexpr double kDefaultFloorDb = -60.0;

/// Distribution summary of a complex mask over the bins of a mixture that
/// carry energy.
struct MaskStats {
  std::size_t total_bins = 0;
  std::size_t bins_over_unit = 0;
  double fraction_over_unit = 0.0;
  std::array<std::size_t, kAngleBuckets> angle_histogram{};
  double magnitude_p50 = 0.0;
  double magnitude_p90 = 0.0;
  double magnitude_p99 = 0.0;
  std::vector<std::pair<double, double>> scatter_sample;
};

struct MaskStatsOptions {
  double energy_floor_db = kDefaultFloorDb;
  std::size_t max_scatter = kMaxScatterPoints;
  std::uint64_t seed = 0;
};

/// Bucket of an angle in [-pi, pi]; pi itself falls into the last bucket.
inline std::size_t angle_bucket(double a) {
  const double u = (a + std::numbers::pi) / (2.0 * std::numbers::pi);
  const auto b = static_cast<std::size_t>(std::floor(u * static_cast<double>(kAngleBuckets)));
  return std::min(b, kAngleBuckets - 1);
}

/// Nearest-rank percentile of an ascending-sorted sample.
inline double nearest_rank(const std::vector<double>& sorted, double pct) {
  if (sorted.empty()) return 0.0;
  const double rank = std::ceil(pct / 100.0 * static_cast<double>(sorted.size()));
  const auto idx = static_cast<std::size_t>(std::max(rank, 1.0)) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

/// Counts only bins with |X| > max|X| * 10^(floor_db / 20). An empty counted
/// set yields fraction 0 and an empty histogram.
inline MaskStats mask_stats(const ComplexGrid& mask, const ComplexGrid& mixture,
                            const MaskStatsOptions& opt = {}) {
  require_same_shape(mask, mixture, "mask_stats");
  double peak = 0.0;
  for (const auto& x : mixture.data()) peak = std::max(peak, std::abs(x));
  const double threshold = peak * std::pow(10.0, opt.energy_floor_db / 20.0);

  MaskStats st;
  std::vector<double> mags;
  std::mt19937_64 rng(opt.seed);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!(std::abs(mixture[i]) > threshold)) continue;
    const Complex m = mask[i];
    const double mag = std::abs(m);
    ++st.total_bins;
    if (mag > 1.0) ++st.bins_over_unit;
    ++st.angle_histogram[angle_bucket(m == Complex{} ? 0.0 : std::arg(m))];
    mags.push_back(mag);
    // reservoir sampling (algorithm R)
    if (opt.max_scatter > 0) {
      if (st.scatter_sample.size() < opt.max_scatter) {
        st.scatter_sample.emplace_back(m.real(), m.imag());
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, seen);
        const std::size_t j = pick(rng);
        if (j < opt.max_scatter) st.scatter_sample[j] = {m.real(), m.imag()};
      }
    }
    ++seen;
  }
  if (st.total_bins > 0)
    st.fraction_over_unit =
        static_cast<double>(st.bins_over_unit) / static_cast<double>(st.total_bins);
  std::sort(mags.begin(), mags.end());
  st.magnitude_p50 = nearest_rank(mags, 50.0);
  st.magnitude_p90 = nearest_rank(mags, 90.0);
  st.magnitude_p99 = nearest_rank(mags, 99.0);
  return st;
}

/// Pearson chi-square statistic of the angle histogram against a uniform
/// distribution (35 degrees of freedom).
inline double angle_uniformity_chi2(const MaskStats& st) {
  if (st.total_bins == 0) return 0.0;
  const double expected = static_cast<double>(st.total_bins) / kAngleBuckets;
  double chi2 = 0.0;
  for (auto c : st.angle_histogram) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  return chi2;
}

}  // namespace maskbench::masks

#endif  // MASKBENCH_MASK_STATS_HPP
