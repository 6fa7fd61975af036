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

#ifndef MASKBENCH_STFT_HPP
#define MASKBENCH_STFT_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/fft.hpp"
#include "maskbench/signal.hpp"

namespace maskbench::dsp {

enum class WindowKind { hann };

struct StftConfig {
  std::size_t window_size = 2048;
  std::size_t hop_size = 441;
  WindowKind window_kind = WindowKind::hann;
  // Frame t is centred on sample t * hop (signal reflect-padded by window/2).
  bool center_pad = true;

  std::size_t bins() const noexcept { return window_size / 2 + 1; }

  void validate() const {
    MASKBENCH_REQUIRE(window_size > 0 && hop_size > 0, invalid_argument,
                      "STFT window and hop must be positive");
    MASKBENCH_REQUIRE(hop_size <= window_size, invalid_argument,
                      "STFT hop must not exceed the window");
    MASKBENCH_REQUIRE(window_size % 2 == 0, invalid_argument,
                      "STFT window size must be even");
  }
};

/// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / N).
inline std::vector<double> make_window(std::size_t n, WindowKind kind = WindowKind::hann) {
  std::vector<double> w(n);
  switch (kind) {
    case WindowKind::hann:
      for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n));
      break;
  }
  return w;
}

/// Number of frames produced for a signal of `samples` samples.
inline std::size_t frame_count(std::size_t samples, const StftConfig& cfg) {
  if (cfg.center_pad) return 1 + samples / cfg.hop_size;
  if (samples < cfg.window_size) return 0;
  return 1 + (samples - cfg.window_size) / cfg.hop_size;
}

namespace detail {

// Reflection about the signal edges without repeating the edge sample,
// folded repeatedly when the pad exceeds the signal.
inline std::size_t reflect_index(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * (static_cast<long long>(n) - 1);
  long long m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<long long>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

inline double window_square_sum_floor() { return 1e-11; }

// Overlap-added squared window at every position of the padded signal.
inline std::vector<double> window_square_sum(std::size_t frames, const StftConfig& cfg,
                                             const std::vector<double>& window) {
  const std::size_t padded = (frames - 1) * cfg.hop_size + cfg.window_size;
  std::vector<double> acc(padded, 0.0);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t n = 0; n < cfg.window_size; ++n)
      acc[t * cfg.hop_size + n] += window[n] * window[n];
  return acc;
}

}  // namespace detail

/// One-sided short-time Fourier transform of every channel.
inline ComplexSpectrogram stft(const Waveform& wave, const StftConfig& cfg) {
  cfg.validate();
  MASKBENCH_REQUIRE(!wave.empty(), invalid_argument, "stft of an empty waveform");
  const std::size_t len = wave.samples();
  const std::size_t pad = cfg.center_pad ? cfg.window_size / 2 : 0;
  if (cfg.center_pad) {
    MASKBENCH_REQUIRE(len > pad, invalid_argument,
                      "signal of " + std::to_string(len) +
                          " samples is too short to reflect-pad a window of " +
                          std::to_string(cfg.window_size));
  } else {
    MASKBENCH_REQUIRE(len >= cfg.window_size, invalid_argument,
                      "window larger than the signal");
  }
  const std::size_t frames = frame_count(len, cfg);
  const std::size_t bins = cfg.bins();
  ComplexSpectrogram out(wave.channels(), frames, bins, cfg.window_size, cfg.hop_size);

  const auto window = make_window(cfg.window_size, cfg.window_kind);
  const RealFft fft(cfg.window_size);
  std::vector<double> buf(cfg.window_size);
  std::vector<Complex> scratch;
  for (std::size_t c = 0; c < wave.channels(); ++c) {
    const auto x = wave.channel(c);
    for (std::size_t t = 0; t < frames; ++t) {
      const long long start = static_cast<long long>(t * cfg.hop_size) - static_cast<long long>(pad);
      for (std::size_t n = 0; n < cfg.window_size; ++n) {
        const long long i = start + static_cast<long long>(n);
        const double v = (i >= 0 && i < static_cast<long long>(len))
                             ? x[static_cast<std::size_t>(i)]
                             : x[detail::reflect_index(i, len)];
        buf[n] = v * window[n];
      }
      fft.forward(buf, out.frame(c, t), scratch);
    }
  }
  return out;
}

/// Weighted overlap-add inverse: each frame is windowed again and the sum is
/// divided by the overlapped squared window, which inverts stft() exactly
/// wherever that sum is non-zero. The result is cut or zero-padded to
/// `out_length` samples.
inline Waveform istft(const ComplexSpectrogram& spec, const StftConfig& cfg,
                      std::size_t out_length, double sample_rate = 44100.0) {
  MASKBENCH_REQUIRE(cfg.hop_size > 0, invalid_argument, "istft with zero hop");
  cfg.validate();
  MASKBENCH_REQUIRE(spec.origin_window == cfg.window_size && spec.origin_hop == cfg.hop_size,
                    invalid_argument,
                    "istft config (window " + std::to_string(cfg.window_size) + ", hop " +
                        std::to_string(cfg.hop_size) + ") does not match the spectrogram (window " +
                        std::to_string(spec.origin_window) + ", hop " +
                        std::to_string(spec.origin_hop) + ")");
  MASKBENCH_REQUIRE(spec.bins() == cfg.bins(), shape_mismatch, "istft bin count mismatch");
  MASKBENCH_REQUIRE(spec.frames() >= 1, shape_mismatch, "istft of a spectrogram without frames");

  const std::size_t frames = spec.frames();
  const std::size_t pad = cfg.center_pad ? cfg.window_size / 2 : 0;
  const auto window = make_window(cfg.window_size, cfg.window_kind);
  const auto norm = detail::window_square_sum(frames, cfg, window);
  const RealFft fft(cfg.window_size);
  std::vector<double> buf(cfg.window_size);
  std::vector<double> acc(norm.size());
  std::vector<Complex> scratch;

  Waveform out(spec.channels(), out_length, sample_rate);
  for (std::size_t c = 0; c < spec.channels(); ++c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      fft.inverse(spec.frame(c, t), buf, scratch);
      double* dst = acc.data() + t * cfg.hop_size;
      for (std::size_t n = 0; n < cfg.window_size; ++n) dst[n] += buf[n] * window[n];
    }
    auto y = out.channel(c);
    for (std::size_t n = 0; n < out_length; ++n) {
      const std::size_t i = n + pad;
      if (i >= acc.size()) break;
      y[n] = norm[i] > detail::window_square_sum_floor() ? acc[i] / norm[i] : 0.0;
    }
  }
  return out;
}

/// Adjoint of istft() with respect to the real and imaginary parts of the
/// spectrogram: for any spectrogram S and waveform g,
///   <istft(S), g> == sum Re(S) Re(G) + Im(S) Im(G),  G = istft_adjoint(g).
/// Used to propagate waveform-domain loss gradients back to the STFT.
inline ComplexSpectrogram istft_adjoint(const Waveform& grad, const StftConfig& cfg,
                                        std::size_t frames) {
  cfg.validate();
  MASKBENCH_REQUIRE(frames >= 1, invalid_argument, "istft adjoint needs at least one frame");
  const std::size_t pad = cfg.center_pad ? cfg.window_size / 2 : 0;
  const std::size_t n_fft = cfg.window_size;
  const std::size_t bins = cfg.bins();
  const auto window = make_window(n_fft, cfg.window_kind);
  const auto norm = detail::window_square_sum(frames, cfg, window);
  const RealFft fft(n_fft);
  std::vector<double> scaled(norm.size());
  std::vector<double> buf(n_fft);
  std::vector<Complex> scratch;

  ComplexSpectrogram out(grad.channels(), frames, bins, cfg.window_size, cfg.hop_size);
  for (std::size_t c = 0; c < grad.channels(); ++c) {
    std::fill(scaled.begin(), scaled.end(), 0.0);
    const auto g = grad.channel(c);
    for (std::size_t n = 0; n < g.size(); ++n) {
      const std::size_t i = n + pad;
      if (i >= scaled.size()) break;
      if (norm[i] > detail::window_square_sum_floor()) scaled[i] = g[n] / norm[i];
    }
    for (std::size_t t = 0; t < frames; ++t) {
      const double* src = scaled.data() + t * cfg.hop_size;
      for (std::size_t n = 0; n < n_fft; ++n) buf[n] = src[n] * window[n];
      auto dst = out.frame(c, t);
      fft.forward(buf, dst, scratch);
      const double inv_n = 1.0 / static_cast<double>(n_fft);
      for (std::size_t k = 0; k < bins; ++k) {
        if (k == 0 || k == bins - 1)
          dst[k] = Complex(dst[k].real() * inv_n, 0.0);
        else
          dst[k] *= 2.0 * inv_n;
      }
    }
  }
  return out;
}

/// |X| per bin.
inline RealGrid magnitude(const ComplexGrid& spec) {
  RealGrid out(spec.channels(), spec.frames(), spec.bins());
  for (std::size_t i = 0; i < spec.size(); ++i) out[i] = std::abs(spec[i]);
  return out;
}

/// Phase per bin in [-pi, pi]; angle(0) is 0.
inline RealGrid angle(const ComplexGrid& spec) {
  RealGrid out(spec.channels(), spec.frames(), spec.bins());
  for (std::size_t i = 0; i < spec.size(); ++i)
    out[i] = (spec[i] == Complex{}) ? 0.0 : std::arg(spec[i]);
  return out;
}

inline ComplexSpectrogram polar(const RealGrid& mag, const RealGrid& phase,
                                std::size_t origin_window = 0, std::size_t origin_hop = 0) {
  require_same_shape(mag, phase, "polar");
  ComplexSpectrogram out(mag.channels(), mag.frames(), mag.bins(), origin_window, origin_hop);
  for (std::size_t i = 0; i < mag.size(); ++i)
    out[i] = Complex(mag[i] * std::cos(phase[i]), mag[i] * std::sin(phase[i]));
  return out;
}

}  // namespace maskbench::dsp

#endif  // MASKBENCH_STFT_HPP
