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

#include "maskbench/benchmark.hpp"
#include "maskbench/masks.hpp"
#include "maskbench/sdr.hpp"
#include "maskbench/stft.hpp"
#include "test_util.hpp"

namespace maskbench {
namespace {

using namespace masks;

ComplexSpectrogram single(Complex v) {
  ComplexSpectrogram s(1, 1, 1, 0, 0);
  s[0] = v;
  return s;
}

RealGrid scalar_grid(double v) { return RealGrid(1, 1, 1, v); }

TEST(Cirm, IdentityMixtureGivesUnitMask) {
  std::mt19937_64 rng(1);
  const auto x = test::random_spectrogram(rng, 2, 5, 9);
  const auto m = compute_cirm(x, x, 0.0);
  for (const auto& v : m.data()) {
    EXPECT_NEAR(v.real(), 1.0, 1e-15);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
  }
}

TEST(Cirm, HandDivision) {
  // (1 + 0i) / (1 + 1i) = (1 - i) / 2
  auto m = compute_cirm(single({1.0, 0.0}), single({1.0, 1.0}), 0.0);
  EXPECT_DOUBLE_EQ(m[0].real(), 0.5);
  EXPECT_DOUBLE_EQ(m[0].imag(), -0.5);
  // Generic complex division agrees on random values.
  std::mt19937_64 rng(2);
  const auto s = test::random_spectrogram(rng, 1, 6, 6);
  const auto x = test::random_spectrogram(rng, 1, 6, 6);
  const auto mm = compute_cirm(s, x, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_LT(std::abs(mm[i] - s[i] / x[i]), 1e-12);
}

TEST(Cirm, OutOfPhaseNoiseExceedsUnitMagnitude) {
  // S = 1, N = -0.5, X = S + N = 0.5
  const auto m = compute_cirm(single({1.0, 0.0}), single({0.5, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(m[0].real(), 2.0);
  EXPECT_DOUBLE_EQ(m[0].imag(), 0.0);
  EXPECT_GT(std::abs(m[0]), 1.0);
}

TEST(Cirm, Errors) {
  EXPECT_THROW(compute_cirm(ComplexGrid(1, 2, 3), ComplexGrid(1, 2, 4)), Error);
  EXPECT_THROW(compute_cirm(ComplexGrid(1, 2, 3), ComplexGrid(1, 2, 3), -1.0), Error);
}

TEST(ApplyComplexMask, UnitAndRotation) {
  std::mt19937_64 rng(3);
  const auto x = test::random_spectrogram(rng, 2, 4, 5);
  const auto same = apply_complex_mask(ComplexMask(2, 4, 5, Complex(1.0, 0.0)), x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(same[i], x[i]);

  ComplexMask rot(1, 1, 1, Complex(0.0, 1.0));
  const auto r = apply_complex_mask(rot, single({1.0, 0.0}));
  EXPECT_DOUBLE_EQ(r[0].real(), 0.0);
  EXPECT_DOUBLE_EQ(r[0].imag(), 1.0);
  EXPECT_THROW(apply_complex_mask(ComplexMask(1, 1, 2), x), Error);
}

TEST(ApplyComplexMask, InvertsCirmAndFactorises) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = test::random_spectrogram(rng, 2, 8, 17);
    const auto x = test::random_spectrogram(rng, 2, 8, 17);
    const auto m = compute_cirm(s, x, 0.0);
    const auto back = apply_complex_mask(m, x);
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_LT(std::abs(back[i] - s[i]), 1e-9);
      EXPECT_NEAR(std::abs(back[i]), std::abs(m[i]) * std::abs(x[i]), 1e-9);
      const double d = std::remainder(std::arg(back[i]) - std::arg(m[i]) - std::arg(x[i]),
                                      2.0 * std::numbers::pi);
      EXPECT_NEAR(d, 0.0, 1e-9);
    }
  }
}

TEST(IdealBinaryMask, Extremes) {
  std::mt19937_64 rng(5);
  const auto x = test::random_spectrogram(rng, 1, 3, 4);
  const auto ones = ideal_binary_mask(x, x);
  const auto zeros = ideal_binary_mask(ComplexGrid(1, 3, 4), x);
  for (double v : ones.data()) EXPECT_EQ(v, 1.0);
  for (double v : zeros.data()) EXPECT_EQ(v, 0.0);
}

TEST(IdealBinaryMask, DisjointSinusoidsSelectTargetBins) {
  const double sr = 8000.0;
  const dsp::StftConfig cfg{256, 64};
  Waveform a(1, 8000, sr), b(1, 8000, sr), mix(1, 8000, sr);
  for (std::size_t n = 0; n < 8000; ++n) {
    a.at(0, n) = 0.5 * std::sin(2.0 * std::numbers::pi * 500.0 * n / sr);
    b.at(0, n) = 0.5 * std::sin(2.0 * std::numbers::pi * 2500.0 * n / sr);
    mix.at(0, n) = a.at(0, n) + b.at(0, n);
  }
  const auto sa = dsp::stft(a, cfg), sx = dsp::stft(mix, cfg);
  const auto ibm = ideal_binary_mask(sa, sx);
  // brute-force membership
  for (std::size_t i = 0; i < ibm.size(); ++i) {
    const bool dom = std::abs(sa[i]) >= std::abs(sx[i] - sa[i]);
    EXPECT_EQ(ibm[i], dom ? 1.0 : 0.0);
  }
  // Target bins around 500 Hz (bin 16) are selected, interferer's (bin 80) are not.
  for (std::size_t t = 2; t + 2 < ibm.frames(); ++t) {
    EXPECT_EQ(ibm(0, t, 16), 1.0);
    EXPECT_EQ(ibm(0, t, 80), 0.0);
  }
  bss::BenchmarkOptions opt;
  opt.stft = cfg;
  const auto est = bss::oracle_separate(sa, sx, mix, bss::MaskVariant::ibm(), opt);
  EXPECT_GT(bss::sdr(a, est), bss::sdr(a, mix) + 20.0);
}

TEST(IdealRatioMask, ClippingAndIdentity) {
  std::mt19937_64 rng(6);
  const auto x = test::random_spectrogram(rng, 1, 3, 4);
  const auto irm = ideal_ratio_mask(x, x, 1.0, 0.0);
  for (double v : irm.data()) EXPECT_DOUBLE_EQ(v, 1.0);

  const auto s2 = single({2.0, 0.0});
  const auto x1 = single({0.0, 1.0});
  EXPECT_DOUBLE_EQ(ideal_ratio_mask(s2, x1, 1.0, 0.0)[0], 1.0);
  EXPECT_DOUBLE_EQ(ideal_ratio_mask(s2, x1, kUnbounded, 0.0)[0], 2.0);
  EXPECT_EQ(ideal_ratio_mask(s2, x1, 1.0, 0.0).bound, 1.0);
  EXPECT_FALSE(ideal_ratio_mask(s2, x1, kUnbounded, 0.0).bound.has_value());
  EXPECT_THROW(ideal_ratio_mask(s2, x1, 0.0), Error);
}

TEST(IdealRatioMask, EqualsCirmMagnitudeWhenUnbounded) {
  std::mt19937_64 rng(7);
  const auto s = test::random_spectrogram(rng, 2, 6, 11);
  const auto x = test::random_spectrogram(rng, 2, 6, 11);
  const auto irm = ideal_ratio_mask(s, x, kUnbounded, 0.0);
  const auto m = compute_cirm(s, x, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(irm[i], std::abs(m[i]), 1e-9);
}

TEST(ClipMaskMagnitude, RescalesOntoCircle) {
  ComplexMask m(1, 1, 1, Complex(3.0, 4.0));
  const auto one = clip_mask_magnitude(m, 1.0);
  EXPECT_NEAR(one[0].real(), 0.6, 1e-15);
  EXPECT_NEAR(one[0].imag(), 0.8, 1e-15);
  const auto two = clip_mask_magnitude(m, 2.0);
  EXPECT_NEAR(two[0].real(), 1.2, 1e-15);
  EXPECT_NEAR(two[0].imag(), 1.6, 1e-15);
  EXPECT_THROW(clip_mask_magnitude(m, 0.0), Error);
}

TEST(ClipMaskMagnitude, PreservesAngleAndSmallValues) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 2.0);
  ComplexMask m(2, 10, 10);
  for (auto& v : m.data()) v = {nd(rng), nd(rng)};
  for (double limit : {0.5, 1.0, 2.0, 5.0}) {
    const auto c = clip_mask_magnitude(m, limit);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double r = std::abs(m[i]);
      if (r <= limit) {
        EXPECT_EQ(c[i], m[i]);
      } else {
        EXPECT_NEAR(std::abs(c[i]), limit, 1e-12);
        EXPECT_NEAR(c[i].real() / limit, m[i].real() / r, 1e-12);
        EXPECT_NEAR(c[i].imag() / limit, m[i].imag() / r, 1e-12);
      }
    }
  }
}

TEST(MixturePhase, MagnitudeOfMixtureRestoresMixture) {
  std::mt19937_64 rng(9);
  const auto x = test::random_spectrogram(rng, 2, 4, 6);
  const auto same = apply_magnitude_with_mixture_phase(dsp::magnitude(x), x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(std::abs(same[i] - x[i]), 1e-9);
  const auto zero = apply_magnitude_with_mixture_phase(RealGrid(2, 4, 6), x);
  for (const auto& v : zero.data()) EXPECT_EQ(std::abs(v), 0.0);
  EXPECT_THROW(apply_magnitude_with_mixture_phase(RealGrid(2, 4, 5), x), Error);
}

TEST(MixturePhase, LosesToComplexMaskOnPhaseShiftedSource) {
  std::mt19937_64 rng(10);
  const double sr = 16000.0;
  const dsp::StftConfig cfg{512, 128};
  auto stems = test::synthetic_stems(rng, 2, 1, 16000, sr, true);
  Waveform mix(1, 16000, sr);
  for (auto& [n, w] : stems)
    for (std::size_t i = 0; i < w.data().size(); ++i) mix.data()[i] += w.data()[i];
  bss::BenchmarkOptions opt;
  opt.stft = cfg;
  const auto s = dsp::stft(stems[0].second, cfg), x = dsp::stft(mix, cfg);
  const double irm = bss::sdr(stems[0].second,
                              bss::oracle_separate(s, x, mix, bss::MaskVariant::irm(kUnbounded), opt));
  const double cirm = bss::sdr(stems[0].second,
                               bss::oracle_separate(s, x, mix, bss::MaskVariant::cirm(kUnbounded), opt));
  EXPECT_LT(irm, cirm);
  EXPECT_GT(cirm, 50.0);
}

TEST(DecouplePhase, KnownValues) {
  PhaseHeads h{scalar_grid(3.0), scalar_grid(4.0)};
  auto p = decouple_phase(h, 1e-300);
  EXPECT_NEAR(p.cos[0], 0.6, 1e-15);
  EXPECT_NEAR(p.sin[0], 0.8, 1e-15);
  p = decouple_phase({scalar_grid(1.0), scalar_grid(0.0)}, 1e-300);
  EXPECT_DOUBLE_EQ(p.cos[0], 1.0);
  EXPECT_DOUBLE_EQ(p.sin[0], 0.0);
  p = decouple_phase({scalar_grid(0.0), scalar_grid(0.0)}, 1e-10);
  EXPECT_EQ(p.cos[0], 0.0);
  EXPECT_EQ(p.sin[0], 0.0);
  EXPECT_EQ(std::abs(recover_cirm(scalar_grid(1.0), p)[0]), 0.0);
  EXPECT_THROW(decouple_phase(h, 0.0), Error);
}

TEST(DecouplePhase, UnitNormAwayFromOrigin) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  PhaseHeads h{RealGrid(1, 30, 30), RealGrid(1, 30, 30)};
  for (std::size_t i = 0; i < h.real.size(); ++i) {
    h.real[i] = nd(rng);
    h.imag[i] = nd(rng);
  }
  const auto p = decouple_phase(h, 1e-10);
  for (std::size_t i = 0; i < h.real.size(); ++i) {
    const double n2 = p.cos[i] * p.cos[i] + p.sin[i] * p.sin[i];
    if (h.real[i] * h.real[i] + h.imag[i] * h.imag[i] > 1e-4) {
      EXPECT_LE(n2, 1.0);
      EXPECT_GE(n2, 1.0 - 1e-6);
    }
  }
}

TEST(RecoverCirm, KnownValuesAndRoundTrip) {
  PhaseFactors up{scalar_grid(0.0), scalar_grid(1.0)};
  const auto m = recover_cirm(scalar_grid(1.0), up);
  EXPECT_EQ(m[0], Complex(0.0, 1.0));
  EXPECT_EQ(std::abs(recover_cirm(scalar_grid(0.0), up)[0]), 0.0);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> rad(0.0, 1.0), ang(-std::numbers::pi, std::numbers::pi);
  RealGrid mag(1, 40, 40);
  PhaseHeads heads{RealGrid(1, 40, 40), RealGrid(1, 40, 40)};
  std::vector<Complex> truth(mag.size());
  for (std::size_t i = 0; i < mag.size(); ++i) {
    truth[i] = std::polar(rad(rng), ang(rng));
    mag[i] = std::abs(truth[i]);
    heads.real[i] = truth[i].real();
    heads.imag[i] = truth[i].imag();
  }
  const auto back = recover_cirm(mag, decouple_phase(heads, 1e-14));
  for (std::size_t i = 0; i < mag.size(); ++i) EXPECT_LT(std::abs(back[i] - truth[i]), 1e-6);
  EXPECT_THROW(recover_cirm(RealGrid(1, 2, 2), up), Error);
}

TEST(CombineMaskDirect, Cases) {
  EXPECT_DOUBLE_EQ(combine_mask_direct(scalar_grid(0.3), scalar_grid(2.0), scalar_grid(0.0))[0], 0.6);
  EXPECT_EQ(combine_mask_direct(scalar_grid(0.5), scalar_grid(2.0), scalar_grid(-2.0))[0], 0.0);
  EXPECT_DOUBLE_EQ(combine_mask_direct(scalar_grid(1.0), scalar_grid(1.0), scalar_grid(1.5))[0], 2.5);
  EXPECT_THROW(combine_mask_direct(scalar_grid(1.0), RealGrid(1, 1, 2), scalar_grid(1.0)), Error);
}

TEST(CombineMaskDirect, NonNegativeAndIdentityRegion) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> nd;
  RealGrid m(1, 20, 20), x(1, 20, 20), q(1, 20, 20);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = u01(rng);
    x[i] = std::abs(nd(rng));
    q[i] = nd(rng);
  }
  const auto out = combine_mask_direct(m, x, q);
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_GE(out[i], 0.0);
    const double lin = m[i] * x[i] + q[i];
    if (lin >= 0.0) {
      EXPECT_GE(out[i], lin);
    }
  }
}

TEST(ReconstructStft, Rotations) {
  std::mt19937_64 rng(14);
  const auto x = test::random_spectrogram(rng, 1, 5, 5);
  PhaseFactors zero{RealGrid(1, 5, 5, 1.0), RealGrid(1, 5, 5, 0.0)};
  const auto same = reconstruct_stft(dsp::magnitude(x), zero, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(std::abs(same[i] - x[i]), 1e-9);

  PhaseFactors quarter{scalar_grid(0.0), scalar_grid(1.0)};
  const auto r = reconstruct_stft(scalar_grid(1.0), quarter, single({1.0, 0.0}));
  EXPECT_NEAR(r[0].real(), 0.0, 1e-15);
  EXPECT_NEAR(r[0].imag(), 1.0, 1e-15);
}

TEST(ReconstructStft, OracleHeadsReproduceSource) {
  std::mt19937_64 rng(15);
  const auto s = test::random_spectrogram(rng, 2, 12, 33);
  const auto x = test::random_spectrogram(rng, 2, 12, 33);
  const auto m = compute_cirm(s, x, 0.0);
  RealGrid mmag(2, 12, 33), q(2, 12, 33);
  PhaseHeads heads{RealGrid(2, 12, 33), RealGrid(2, 12, 33)};
  const auto xmag = dsp::magnitude(x);
  for (std::size_t i = 0; i < s.size(); ++i) {
    mmag[i] = std::min(std::abs(m[i]), 1.0);
    q[i] = std::abs(s[i]) - mmag[i] * xmag[i];
    heads.real[i] = m[i].real();
    heads.imag[i] = m[i].imag();
  }
  const auto est = reconstruct_stft(combine_mask_direct(mmag, xmag, q),
                                    decouple_phase(heads, 1e-20), x);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_LT(std::abs(est[i] - s[i]), 1e-6);
}

}  // namespace
}  // namespace maskbench
