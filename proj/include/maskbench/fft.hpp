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

#ifndef MASKBENCH_FFT_HPP
#define MASKBENCH_FFT_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "maskbench/error.hpp"

namespace maskbench::dsp {

/// In-place complex DFT of arbitrary length. Powers of two use an iterative
/// radix-2 kernel; other lengths go through Bluestein's chirp-z algorithm.
/// A plan is immutable after construction and may be shared across threads.
class ComplexFft {
 public:
  using C = std::complex<double>;

  explicit ComplexFft(std::size_t n) : n_(n) {
    MASKBENCH_REQUIRE(n >= 1, invalid_argument, "FFT length must be positive");
    if (is_pow2(n)) {
      build_radix2(n, twiddles_, bitrev_);
    } else {
      m_ = 1;
      while (m_ < 2 * n - 1) m_ <<= 1;
      build_radix2(m_, twiddles_, bitrev_);
      chirp_.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the argument small for long transforms.
        const auto k2 = static_cast<double>((k * k) % (2 * n));
        chirp_[k] = std::polar(1.0, -std::numbers::pi * k2 / static_cast<double>(n));
      }
      std::vector<C> b(m_, C{});
      b[0] = std::conj(chirp_[0]);
      for (std::size_t k = 1; k < n; ++k) b[k] = b[m_ - k] = std::conj(chirp_[k]);
      radix2(b, false);
      chirp_fft_ = std::move(b);
    }
  }

  std::size_t size() const noexcept { return n_; }

  /// X[k] = sum_n x[n] e^{-2 pi i k n / N}
  void forward(std::span<C> data) const { transform(data, false); }

  /// x[n] = (1/N) sum_k X[k] e^{+2 pi i k n / N}
  void inverse(std::span<C> data) const {
    transform(data, true);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
  }

 private:
  static bool is_pow2(std::size_t n) { return (n & (n - 1)) == 0; }

  static void build_radix2(std::size_t n, std::vector<C>& tw, std::vector<std::size_t>& rev) {
    tw.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k)
      tw[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                  static_cast<double>(n));
    rev.assign(n, 0);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      rev[i] = r;
    }
  }

  void radix2(std::span<C> a, bool inverse) const {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i)
      if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n / len;
      for (std::size_t i = 0; i < n; i += len) {
        for (std::size_t j = 0; j < half; ++j) {
          C w = twiddles_[j * step];
          if (inverse) w = std::conj(w);
          const C u = a[i + j];
          const C v = a[i + j + half] * w;
          a[i + j] = u + v;
          a[i + j + half] = u - v;
        }
      }
    }
  }

  void transform(std::span<C> data, bool inverse) const {
    MASKBENCH_REQUIRE(data.size() == n_, shape_mismatch, "FFT buffer length mismatch");
    if (m_ == 0) {
      radix2(data, inverse);
      return;
    }
    // Unscaled inverse DFT = conj(DFT(conj(x))).
    if (inverse)
      for (auto& v : data) v = std::conj(v);
    std::vector<C> a(m_, C{});
    for (std::size_t k = 0; k < n_; ++k) a[k] = data[k] * chirp_[k];
    radix2(a, false);
    for (std::size_t k = 0; k < m_; ++k) a[k] *= chirp_fft_[k];
    radix2(a, true);
    const double scale = 1.0 / static_cast<double>(m_);
    for (std::size_t k = 0; k < n_; ++k) data[k] = a[k] * scale * chirp_[k];
    if (inverse)
      for (auto& v : data) v = std::conj(v);
  }

  std::size_t n_;
  std::size_t m_ = 0;
  std::vector<C> twiddles_;
  std::vector<std::size_t> bitrev_;
  std::vector<C> chirp_;
  std::vector<C> chirp_fft_;
};

/// Real-input DFT of even length N producing the N/2+1 non-negative bins,
/// computed with one complex transform of length N/2.
class RealFft {
 public:
  using C = std::complex<double>;

  explicit RealFft(std::size_t n) : n_(n), half_(n / 2 == 0 ? 1 : n / 2) {
    MASKBENCH_REQUIRE(n >= 2 && n % 2 == 0, invalid_argument,
                      "real FFT length must be even and at least 2");
    rot_.resize(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k)
      rot_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                    static_cast<double>(n));
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  /// out[k] = sum_n in[n] e^{-2 pi i k n / N}, k = 0..N/2
  void forward(std::span<const double> in, std::span<C> out, std::vector<C>& scratch) const {
    const std::size_t h = n_ / 2;
    scratch.resize(h);
    for (std::size_t k = 0; k < h; ++k) scratch[k] = C(in[2 * k], in[2 * k + 1]);
    half_.forward(scratch);
    for (std::size_t k = 0; k <= h; ++k) {
      const C zk = scratch[k % h];
      const C zc = std::conj(scratch[(h - k) % h]);
      const C even = 0.5 * (zk + zc);
      const C odd = C(0.0, -0.5) * (zk - zc);
      out[k] = even + rot_[k] * odd;
    }
  }

  /// Inverse of forward(). The imaginary parts of the DC and Nyquist bins are
  /// ignored, as they cannot be produced by a real signal.
  void inverse(std::span<const C> in, std::span<double> out, std::vector<C>& scratch) const {
    const std::size_t h = n_ / 2;
    scratch.resize(h);
    auto bin = [&](std::size_t k) {
      return (k == 0 || k == h) ? C(in[k].real(), 0.0) : in[k];
    };
    for (std::size_t k = 0; k < h; ++k) {
      const C xk = bin(k);
      const C xc = std::conj(bin(h - k));
      const C even = 0.5 * (xk + xc);
      const C odd = 0.5 * (xk - xc) * std::conj(rot_[k]);
      scratch[k] = even + C(0.0, 1.0) * odd;
    }
    half_.inverse(scratch);
    for (std::size_t k = 0; k < h; ++k) {
      out[2 * k] = scratch[k].real();
      out[2 * k + 1] = scratch[k].imag();
    }
  }

 private:
  std::size_t n_;
  ComplexFft half_;
  std::vector<C> rot_;
};

}  // namespace maskbench::dsp

#endif  // MASKBENCH_FFT_HPP
