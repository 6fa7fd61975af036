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

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "maskbench/fft.hpp"
#include "maskbench/stft.hpp"
#include "test_util.hpp"

namespace maskbench {
namespace {

using dsp::StftConfig;

// Direct O(N^2) DFT of one centre-padded, Hann-windowed frame.
std::vector<Complex> naive_frame(std::span<const double> x, std::size_t n_fft, std::size_t hop,
                                 std::size_t t) {
  const long long len = static_cast<long long>(x.size());
  std::vector<Complex> out(n_fft / 2 + 1);
  for (std::size_t k = 0; k <= n_fft / 2; ++k) {
    Complex acc{};
    for (std::size_t n = 0; n < n_fft; ++n) {
      long long i = static_cast<long long>(t * hop + n) - static_cast<long long>(n_fft / 2);
      if (i < 0) i = -i;
      if (i >= len) i = 2 * (len - 1) - i;
      const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / n_fft));
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * n) / n_fft;
      acc += x[static_cast<std::size_t>(i)] * w * Complex(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

TEST(Fft, MatchesNaiveDftForSeveralLengths) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (std::size_t n : {1u, 2u, 3u, 8u, 12u, 17u, 64u, 100u}) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = {nd(rng), nd(rng)};
    auto y = x;
    dsp::ComplexFft(n).forward(y);
    for (std::size_t k = 0; k < n; ++k) {
      Complex ref{};
      for (std::size_t j = 0; j < n; ++j)
        ref += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * j) / double(n));
      EXPECT_NEAR(std::abs(y[k] - ref), 0.0, 1e-9) << "n=" << n << " k=" << k;
    }
    dsp::ComplexFft(n).inverse(y);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(std::abs(y[k] - x[k]), 0.0, 1e-12);
  }
}

TEST(Fft, RealTransformRoundTrip) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (std::size_t n : {2u, 6u, 16u, 30u, 2048u}) {
    std::vector<double> x(n), back(n);
    for (auto& v : x) v = nd(rng);
    std::vector<Complex> spec(n / 2 + 1), scratch;
    dsp::RealFft fft(n);
    fft.forward(x, spec, scratch);
    for (std::size_t k = 0; k <= n / 2; k += std::max<std::size_t>(1, n / 7)) {
      Complex ref{};
      for (std::size_t j = 0; j < n; ++j)
        ref += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * j) / double(n));
      EXPECT_NEAR(std::abs(spec[k] - ref), 0.0, 1e-9);
    }
    fft.inverse(spec, back, scratch);
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(back[j], x[j], 1e-12);
  }
  EXPECT_THROW(dsp::RealFft(7), Error);
}

TEST(Stft, FrameCountForThreeSecondsAt44k) {
  std::mt19937_64 rng(3);
  const auto x = test::random_waveform(rng, 2, 132300);
  const StftConfig cfg{2048, 441, dsp::WindowKind::hann, true};
  const auto s = dsp::stft(x, cfg);
  EXPECT_EQ(s.frames(), 301u);
  EXPECT_EQ(s.bins(), 1025u);
  EXPECT_EQ(s.channels(), 2u);
  EXPECT_EQ(s.origin_window, 2048u);
  EXPECT_EQ(s.origin_hop, 441u);

  // Compare a few frames, including both reflected edges, with a direct DFT.
  for (std::size_t t : {0u, 1u, 150u, 299u, 300u}) {
    const auto ref = naive_frame(x.channel(1), 2048, 441, t);
    double err = 0.0, mag = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      err = std::max(err, std::abs(s(1, t, k) - ref[k]));
      mag = std::max(mag, std::abs(ref[k]));
    }
    EXPECT_LT(err, 1e-9 * mag) << "frame " << t;
  }
}

TEST(Stft, NonCenteredFrameCount) {
  Waveform x(1, 10000, 16000.0);
  const StftConfig cfg{512, 128, dsp::WindowKind::hann, false};
  EXPECT_EQ(dsp::stft(x, cfg).frames(), 1u + (10000u - 512u) / 128u);
}

TEST(Stft, ZeroSignalGivesZeroSpectrogram) {
  Waveform x(2, 5000, 44100.0);
  const auto s = dsp::stft(x, {1024, 256});
  for (const auto& v : s.data()) EXPECT_EQ(v, Complex{});
}

TEST(Stft, BinCentredSinusoidConcentratesInItsBin) {
  const std::size_t n = 2048, k = 100;
  const double sr = 44100.0, amp = 0.7;
  Waveform x(1, 44100, sr);
  for (std::size_t i = 0; i < x.samples(); ++i)
    x.at(0, i) = amp * std::cos(2.0 * std::numbers::pi * double(k) * double(i) / double(n));
  const auto s = dsp::stft(x, {n, 441});
  // Windowed DFT of a bin-centred cosine under a periodic Hann window:
  // |X[k]| = A N / 4, |X[k +- 1]| = A N / 8, zero elsewhere.
  for (std::size_t t = 5; t + 5 < s.frames(); ++t) {
    EXPECT_NEAR(std::abs(s(0, t, k)), amp * n / 4.0, 1e-8 * n);
    EXPECT_NEAR(std::abs(s(0, t, k - 1)), amp * n / 8.0, 1e-8 * n);
    EXPECT_NEAR(std::abs(s(0, t, k + 1)), amp * n / 8.0, 1e-8 * n);
    double rest = 0.0;
    for (std::size_t f = 0; f < s.bins(); ++f)
      if (f + 1 < k || f > k + 1) rest = std::max(rest, std::abs(s(0, t, f)));
    EXPECT_LT(rest, 1e-8 * n);
  }
}

TEST(Stft, RoundTripIsExact) {
  std::mt19937_64 rng(4);
  for (bool center : {true, false}) {
    const StftConfig cfg{2048, 441, dsp::WindowKind::hann, center};
    const auto x = test::random_waveform(rng, 2, 4 * 2048 + 777);
    const auto y = dsp::istft(dsp::stft(x, cfg), cfg, x.samples(), x.sample_rate());
    // Without centre padding the first and last window are not fully covered.
    const std::size_t edge = center ? 0 : cfg.window_size;
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = edge; i + edge < x.samples(); ++i) {
        num += std::pow(x.at(c, i) - y.at(c, i), 2);
        den += std::pow(x.at(c, i), 2);
      }
    EXPECT_LT(std::sqrt(num / den), 1e-6) << "center=" << center;
  }
}

TEST(Stft, RoundTripOddHopAndSmallWindow) {
  std::mt19937_64 rng(5);
  const StftConfig cfg{30, 7};
  const auto x = test::random_waveform(rng, 1, 400, 8000.0);
  const auto y = dsp::istft(dsp::stft(x, cfg), cfg, x.samples(), 8000.0);
  EXPECT_LT(test::rel_l2(x.data(), y.data()), 1e-10);
}

TEST(Stft, Linearity) {
  std::mt19937_64 rng(6);
  const StftConfig cfg{512, 128};
  const auto x = test::random_waveform(rng, 2, 4000);
  const auto y = test::random_waveform(rng, 2, 4000);
  Waveform z(2, 4000, 44100.0);
  const double a = 0.3, b = -1.7;
  for (std::size_t i = 0; i < z.data().size(); ++i) z.data()[i] = a * x.data()[i] + b * y.data()[i];
  const auto sx = dsp::stft(x, cfg), sy = dsp::stft(y, cfg), sz = dsp::stft(z, cfg);
  for (std::size_t i = 0; i < sz.size(); ++i)
    EXPECT_LT(std::abs(sz[i] - (a * sx[i] + b * sy[i])), 1e-6);
}

TEST(Istft, ZeroSpectrogramGivesSilence) {
  const StftConfig cfg{256, 64};
  ComplexSpectrogram s(2, 20, cfg.bins(), 256, 64);
  const auto y = dsp::istft(s, cfg, 1200, 8000.0);
  EXPECT_EQ(y.samples(), 1200u);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Istft, HalvedMagnitudeQuartersEnergy) {
  std::mt19937_64 rng(7);
  const StftConfig cfg{2048, 441};
  const auto x = test::random_waveform(rng, 1, 44100);
  auto s = dsp::stft(x, cfg);
  for (auto& v : s.data()) v *= 0.5;
  const auto y = dsp::istft(s, cfg, x.samples(), x.sample_rate());
  double ex = 0.0, ey = 0.0;
  for (std::size_t i = 0; i < x.samples(); ++i) {
    ex += x.at(0, i) * x.at(0, i);
    ey += y.at(0, i) * y.at(0, i);
  }
  EXPECT_NEAR(ey / ex, 0.25, 1e-4);
}

TEST(Istft, OutputLengthPadsAndTruncates) {
  std::mt19937_64 rng(8);
  const StftConfig cfg{64, 16};
  const auto x = test::random_waveform(rng, 1, 300, 8000.0);
  const auto s = dsp::stft(x, cfg);
  const auto shorter = dsp::istft(s, cfg, 100, 8000.0);
  const auto longer = dsp::istft(s, cfg, 1000, 8000.0);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_NEAR(shorter.at(0, i), x.at(0, i), 1e-12);
  for (std::size_t i = 340; i < 1000; ++i) EXPECT_EQ(longer.at(0, i), 0.0);
}

TEST(Istft, AdjointDotProductIdentity) {
  std::mt19937_64 rng(9);
  for (bool center : {true, false}) {
    const StftConfig cfg{32, 12, dsp::WindowKind::hann, center};
    auto s = test::random_spectrogram(rng, 2, 9, cfg.bins());
    s.origin_window = 32;
    s.origin_hop = 12;
    const std::size_t len = 110;
    const auto g = test::random_waveform(rng, 2, len, 8000.0);
    const auto y = dsp::istft(s, cfg, len, 8000.0);
    const auto ga = dsp::istft_adjoint(g, cfg, s.frames());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.data().size(); ++i) lhs += y.data()[i] * g.data()[i];
    for (std::size_t i = 0; i < s.size(); ++i)
      rhs += s[i].real() * ga[i].real() + s[i].imag() * ga[i].imag();
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Stft, Errors) {
  Waveform empty;
  EXPECT_THROW(dsp::stft(empty, {}), Error);
  Waveform shortw(1, 100, 8000.0);
  EXPECT_THROW(dsp::stft(shortw, {2048, 441}), Error);
  EXPECT_THROW(dsp::stft(shortw, {64, 128}), Error);
  EXPECT_THROW(dsp::stft(shortw, {64, 0}), Error);
  ComplexSpectrogram s(1, 4, 33, 64, 16);
  EXPECT_THROW(dsp::istft(s, {64, 32}, 100), Error);
  EXPECT_THROW(dsp::istft(s, {128, 16}, 100), Error);
  EXPECT_THROW(dsp::istft(s, {64, 0}, 100), Error);
}

TEST(Spectral, MagnitudeAngleConventions) {
  ComplexSpectrogram s(1, 1, 2, 2, 1);
  s(0, 0, 0) = {3.0, 4.0};
  s(0, 0, 1) = {0.0, 0.0};
  const auto m = dsp::magnitude(s);
  const auto a = dsp::angle(s);
  EXPECT_DOUBLE_EQ(m(0, 0, 0), 5.0);
  EXPECT_DOUBLE_EQ(a(0, 0, 0), std::atan2(4.0, 3.0));
  EXPECT_EQ(m(0, 0, 1), 0.0);
  EXPECT_EQ(a(0, 0, 1), 0.0);
}

TEST(Spectral, PolarInvertsMagnitudeAndAngle) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = test::random_spectrogram(rng, 2, 7, 13, std::pow(10.0, trial % 5 - 2));
    const auto a = dsp::angle(s);
    for (double v : a.data()) {
      EXPECT_LE(v, std::numbers::pi);
      EXPECT_GE(v, -std::numbers::pi);
    }
    const auto back = dsp::polar(dsp::magnitude(s), a);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_LT(std::abs(back[i] - s[i]), 1e-6);
  }
  EXPECT_THROW(dsp::polar(RealGrid(1, 2, 3), RealGrid(1, 3, 2)), Error);
}

}  // namespace
}  // namespace maskbench
