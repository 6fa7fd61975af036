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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "maskbench/mask_stats.hpp"
#include "test_util.hpp"

namespace maskbench {
namespace {

using namespace masks;

TEST(MaskStats, UnitMaskHasNothingOverUnit) {
  std::mt19937_64 rng(1);
  const auto x = test::random_spectrogram(rng, 2, 10, 10);
  const auto st = mask_stats(ComplexMask(2, 10, 10, Complex(1.0, 0.0)), x);
  EXPECT_EQ(st.total_bins, 200u);
  EXPECT_EQ(st.bins_over_unit, 0u);
  EXPECT_EQ(st.fraction_over_unit, 0.0);
  EXPECT_EQ(st.angle_histogram[angle_bucket(0.0)], 200u);
  EXPECT_DOUBLE_EQ(st.magnitude_p50, 1.0);
}

TEST(MaskStats, ThreeOfTenCountedBinsOverUnit) {
  // 12 bins; two are below the -60 dB floor and must not be counted.
  ComplexSpectrogram x(1, 1, 12, 22, 1);
  ComplexMask m(1, 1, 12, Complex(0.5, 0.0));
  for (std::size_t f = 0; f < 12; ++f) x[f] = {1.0, 0.0};
  x[10] = {1e-4, 0.0};
  x[11] = {0.0, 0.0};
  m[10] = {5.0, 0.0};
  m[11] = {5.0, 0.0};
  m[2] = std::polar(1.5, 0.3);
  m[5] = std::polar(1.5, -2.0);
  m[7] = std::polar(1.5, 3.0);
  const auto st = mask_stats(m, x);
  EXPECT_EQ(st.total_bins, 10u);
  EXPECT_EQ(st.bins_over_unit, 3u);
  EXPECT_DOUBLE_EQ(st.fraction_over_unit, 0.3);
  std::size_t hist = 0;
  for (auto c : st.angle_histogram) hist += c;
  EXPECT_EQ(hist, st.total_bins);
  EXPECT_EQ(st.scatter_sample.size(), 10u);
}

TEST(MaskStats, EmptyCountedSetGivesZeroFraction) {
  const auto st = mask_stats(ComplexMask(1, 3, 3, Complex(4.0, 0.0)), ComplexGrid(1, 3, 3));
  EXPECT_EQ(st.total_bins, 0u);
  EXPECT_EQ(st.fraction_over_unit, 0.0);
  EXPECT_TRUE(st.scatter_sample.empty());
}

TEST(MaskStats, AngleBucketEdges) {
  EXPECT_EQ(angle_bucket(-std::numbers::pi), 0u);
  EXPECT_EQ(angle_bucket(std::numbers::pi), kAngleBuckets - 1);
  EXPECT_EQ(angle_bucket(0.0), kAngleBuckets / 2);
}

TEST(MaskStats, MatchesExhaustiveCountOnRandomGrids) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = test::random_spectrogram(rng, 2, 15, 20, std::pow(10.0, trial % 4));
    const auto s = test::random_spectrogram(rng, 2, 15, 20);
    const auto m = compute_cirm(s, x);
    const double floor_db = -10.0 * (trial % 5);
    const auto st = mask_stats(m, x, {floor_db});
    double peak = 0.0;
    for (const auto& v : x.data()) peak = std::max(peak, std::abs(v));
    std::size_t total = 0, over = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (20.0 * std::log10(std::abs(x[i]) / peak) <= floor_db) continue;
      ++total;
      over += std::abs(m[i]) > 1.0;
    }
    EXPECT_EQ(st.total_bins, total);
    EXPECT_EQ(st.bins_over_unit, over);
  }
}

TEST(MaskStats, ReservoirIsBoundedAndDeterministic) {
  std::mt19937_64 rng(3);
  const auto x = test::random_spectrogram(rng, 1, 100, 100);
  const auto m = compute_cirm(test::random_spectrogram(rng, 1, 100, 100), x);
  MaskStatsOptions opt;
  opt.energy_floor_db = -300.0;
  opt.max_scatter = 500;
  const auto a = mask_stats(m, x, opt);
  const auto b = mask_stats(m, x, opt);
  EXPECT_EQ(a.scatter_sample.size(), 500u);
  EXPECT_EQ(a.scatter_sample, b.scatter_sample);
  EXPECT_LE(a.magnitude_p50, a.magnitude_p90);
  EXPECT_LE(a.magnitude_p90, a.magnitude_p99);
}

TEST(MaskStats, PhasesOfRandomMasksLookUniform) {
  std::mt19937_64 rng(4);
  const auto x = test::random_spectrogram(rng, 1, 200, 180);
  const auto m = compute_cirm(test::random_spectrogram(rng, 1, 200, 180), x);
  MaskStatsOptions opt;
  opt.energy_floor_db = -300.0;
  const auto st = mask_stats(m, x, opt);
  // 99.9th percentile of chi-square with 35 dof is about 66.6.
  EXPECT_LT(angle_uniformity_chi2(st), 66.6);
}

}  // namespace
}  // namespace maskbench
