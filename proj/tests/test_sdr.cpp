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
#include <cstring>
#include <random>

#include "maskbench/benchmark.hpp"
#include "maskbench/sdr.hpp"
#include "test_util.hpp"

namespace maskbench {
namespace {

using bss::MaskVariant;

TEST(Sdr, IdentityIsCappedByEps) {
  std::mt19937_64 rng(1);
  auto s = test::random_waveform(rng, 2, 1000);
  double e = 0.0;
  for (double v : s.data()) e += v * v;
  for (double& v : s.data()) v /= std::sqrt(e);
  const double db = bss::sdr(s, s, 1e-10);
  EXPECT_NEAR(db, 100.0, 1e-9);
  EXPECT_GT(db, 90.0);
}

TEST(Sdr, TenDbForTenthErrorEnergy) {
  std::mt19937_64 rng(2);
  const auto s = test::random_waveform(rng, 1, 4000, 8000.0, 10.0);
  auto noise = test::random_waveform(rng, 1, 4000, 8000.0, 1.0);
  double es = 0.0, en = 0.0;
  for (std::size_t i = 0; i < 4000; ++i) {
    es += s.data()[i] * s.data()[i];
    en += noise.data()[i] * noise.data()[i];
  }
  Waveform est = s;
  const double k = std::sqrt(es / 10.0 / en);
  for (std::size_t i = 0; i < 4000; ++i) est.data()[i] += k * noise.data()[i];
  EXPECT_NEAR(bss::sdr(s, est), 10.0, 1e-9);
}

TEST(Sdr, NegatedEstimate) {
  std::mt19937_64 rng(3);
  const auto s = test::random_waveform(rng, 2, 3000);
  Waveform neg = s;
  for (double& v : neg.data()) v = -v;
  double es = 0.0, ee = 0.0;
  for (std::size_t i = 0; i < s.data().size(); ++i) {
    es += s.data()[i] * s.data()[i];
    ee += std::pow(neg.data()[i] - s.data()[i], 2);
  }
  EXPECT_NEAR(ee, 4.0 * es, 1e-9 * es);
  EXPECT_NEAR(bss::sdr(s, neg), -6.0206, 1e-3);
  EXPECT_NEAR(bss::sdr(s, neg), -10.0 * std::log10(4.0), 1e-9);
}

TEST(Sdr, ScaledEstimates) {
  std::mt19937_64 rng(4);
  const auto s = test::random_waveform(rng, 1, 5000, 8000.0, 3.0);
  for (double a : {0.5, 0.9, 1.1}) {
    Waveform est = s;
    for (double& v : est.data()) v *= a;
    EXPECT_NEAR(bss::sdr(s, est), -10.0 * std::log10((1.0 - a) * (1.0 - a)), 1e-6);
  }
}

TEST(Sdr, ErrorsAndSilentReference) {
  Waveform a(1, 10, 8000.0), b(1, 11, 8000.0), c(2, 10, 8000.0);
  EXPECT_THROW(bss::sdr(a, b), Error);
  EXPECT_THROW(bss::sdr(a, c), Error);
  EXPECT_THROW(bss::sdr(a, a, 0.0), Error);
  EXPECT_TRUE(std::isinf(bss::sdr(a, a)));
  EXPECT_LT(bss::sdr(a, a), 0.0);
}

TEST(WindowedMedianSdr, StationaryErrorMatchesGlobal) {
  std::mt19937_64 rng(5);
  const double sr = 1000.0;
  Waveform s(1, 10000, sr), est(1, 10000, sr);
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < 10000; ++i) {
    s.at(0, i) = std::sin(0.05 * i);
    est.at(0, i) = s.at(0, i) + 0.05 * nd(rng);
  }
  EXPECT_NEAR(bss::windowed_median_sdr(s, est, 1.0), bss::sdr(s, est), 0.1);
}

TEST(WindowedMedianSdr, LocalisedErrorIgnoredByMedian) {
  const double sr = 1000.0;
  Waveform s(1, 10000, sr), est(1, 10000, sr);
  for (std::size_t i = 0; i < 10000; ++i) {
    s.at(0, i) = std::sin(0.05 * i);
    est.at(0, i) = s.at(0, i) * (i < 1000 ? -3.0 : 1.001);
  }
  Waveform clean_ref(1, 1000, sr), clean_est(1, 1000, sr);
  for (std::size_t i = 0; i < 1000; ++i) {
    clean_ref.at(0, i) = s.at(0, 5000 + i);
    clean_est.at(0, i) = est.at(0, 5000 + i);
  }
  const double clean = bss::sdr(clean_ref, clean_est);
  EXPECT_GE(bss::windowed_median_sdr(s, est, 1.0), clean - 1e-6);
  EXPECT_LT(bss::sdr(s, est), 10.0);
}

TEST(WindowedMedianSdr, IdentityCapsAndSilentWindowsSkipped) {
  const double sr = 100.0;
  Waveform s(1, 1000, sr);
  for (std::size_t i = 500; i < 1000; ++i) s.at(0, i) = 1.0;
  // every non-silent window has energy 100; identity gives 10 log10(100 / eps)
  EXPECT_NEAR(bss::windowed_median_sdr(s, s, 1.0), 10.0 * std::log10(100.0 / 1e-10), 1e-9);
  EXPECT_THROW(bss::windowed_median_sdr(s, s, 20.0), Error);
  EXPECT_THROW(bss::windowed_median_sdr(s, s, 0.0), Error);
  Waveform silent(1, 1000, sr);
  EXPECT_TRUE(std::isinf(bss::windowed_median_sdr(silent, silent, 1.0)));
}

TEST(MaskVariant, GrammarRoundTrip) {
  const auto vs =
      bss::parse_variant_list("cirm:1,cirm:2,cirm:5,cirm:10,cirm:inf,irm:1,irm:inf,ibm,mixture");
  ASSERT_EQ(vs.size(), 9u);
  EXPECT_EQ(vs[0], MaskVariant::cirm(1.0));
  EXPECT_EQ(vs[4], MaskVariant::cirm(masks::kUnbounded));
  EXPECT_EQ(vs[7], MaskVariant::ibm());
  EXPECT_EQ(vs[8], MaskVariant::mixture());
  for (const auto& v : vs) EXPECT_EQ(MaskVariant::parse(v.token()), v);
  EXPECT_EQ(MaskVariant::cirm(masks::kUnbounded).label(), "cIRM (inf)");
  for (const char* bad : {"cirm", "cirm:", "cirm:-1", "cirm:abc", "foo", "irm:0", "cirm:1x"})
    EXPECT_THROW(MaskVariant::parse(bad), Error) << bad;
  EXPECT_THROW(bss::parse_variant_list(""), Error);
}

std::vector<std::pair<std::string, Waveform>> normalised_stems(std::mt19937_64& rng,
                                                               std::size_t n, bool oop) {
  return test::synthetic_stems(rng, n, 2, 3 * 8000, 8000.0, oop);
}

bss::BenchmarkOptions small_opts() {
  bss::BenchmarkOptions o;
  o.stft = {512, 128};
  return o;
}

TEST(OracleBenchmark, UnboundedCirmIsNearPerfect) {
  std::mt19937_64 rng(6);
  const auto stems = normalised_stems(rng, 3, false);
  const auto r = bss::oracle_benchmark(stems, {MaskVariant::cirm(masks::kUnbounded)}, small_opts());
  for (const auto& c : r.cells) EXPECT_GT(c.sdr_db, 50.0) << c.source;
}

TEST(OracleBenchmark, OrderingOnOutOfPhaseMixtures) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 4; ++trial) {
    const auto stems = normalised_stems(rng, 2 + trial % 3, true);
    const auto vs = bss::standard_variants();
    const auto r = bss::oracle_benchmark(stems, vs, small_opts());
    for (const auto& src : r.sources) {
      const double mix = r.at(src, MaskVariant::mixture());
      const double irm1 = r.at(src, MaskVariant::irm(1.0));
      double prev = r.at(src, MaskVariant::cirm(1.0));
      EXPECT_LE(mix, irm1) << src;
      EXPECT_LE(irm1, prev) << src;
      for (double l : {2.0, 5.0, 10.0, masks::kUnbounded}) {
        const double cur = r.at(src, MaskVariant::cirm(l));
        EXPECT_LE(prev, cur) << src << " L=" << l;
        prev = cur;
      }
    }
  }
}

TEST(OracleBenchmark, SingleSourceAsOwnMixtureHitsCap) {
  std::mt19937_64 rng(8);
  auto stems = normalised_stems(rng, 2, false);
  for (double& v : stems[1].second.data()) v = 0.0;
  const auto r = bss::oracle_benchmark(stems, bss::standard_variants(), small_opts());
  for (const auto& v : bss::standard_variants())
    EXPECT_EQ(bss::cap_sdr(r.at(stems[0].first, v)), bss::kSdrCapDb) << v.token();
}

TEST(OracleBenchmark, DeterministicAndSerialisable) {
  std::mt19937_64 rng(9);
  const auto stems = normalised_stems(rng, 2, true);
  const auto vs = bss::parse_variant_list("mixture,irm:1,cirm:1,cirm:inf");
  const auto a = bss::oracle_benchmark(stems, vs, small_opts());
  const auto b = bss::oracle_benchmark(stems, vs, small_opts());
  ASSERT_EQ(a.cells.size(), 8u);
  for (std::size_t i = 0; i < a.cells.size(); ++i)
    EXPECT_EQ(std::memcmp(&a.cells[i].sdr_db, &b.cells[i].sdr_db, sizeof(double)), 0);
  const auto csv = bss::report_csv(a);
  EXPECT_EQ(csv.rfind("source,variant,sdr_db\n", 0), 0u);
  EXPECT_NE(csv.find("vocals,cirm:inf,"), std::string::npos);
  const auto table = bss::report_table(a);
  EXPECT_NE(table.find("cIRM (inf)"), std::string::npos);
  EXPECT_NE(table.find("Mixture"), std::string::npos);

  auto windowed = small_opts();
  windowed.aggregation = bss::Aggregation::windowed_median;
  const auto w = bss::oracle_benchmark(stems, vs, windowed);
  EXPECT_EQ(w.aggregation, bss::Aggregation::windowed_median);
  EXPECT_EQ(w.cells.size(), 8u);
}

TEST(OracleBenchmark, Errors) {
  std::mt19937_64 rng(10);
  auto stems = normalised_stems(rng, 2, false);
  EXPECT_THROW(bss::oracle_benchmark({stems[0]}, {MaskVariant::ibm()}, small_opts()), Error);
  EXPECT_THROW(bss::oracle_benchmark(stems, {}, small_opts()), Error);
  stems[1].second = Waveform(2, 100, 8000.0);
  EXPECT_THROW(bss::oracle_benchmark(stems, {MaskVariant::ibm()}, small_opts()), Error);
}

}  // namespace
}  // namespace maskbench
