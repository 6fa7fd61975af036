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

#ifndef MASKBENCH_SIGNAL_HPP
#define MASKBENCH_SIGNAL_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maskbench/error.hpp"

namespace maskbench {

using Complex = std::complex<double>;

/// Multi-channel time-domain signal, stored channel-major.
class Waveform {
 public:
  Waveform() = default;

  Waveform(std::size_t channels, std::size_t samples, double sample_rate)
      : channels_(channels), samples_(samples), sample_rate_(sample_rate),
        data_(channels * samples, 0.0) {
    MASKBENCH_REQUIRE(channels >= 1, invalid_argument, "waveform needs at least one channel");
    MASKBENCH_REQUIRE(sample_rate > 0.0, invalid_argument, "sample rate must be positive");
  }

  Waveform(std::size_t channels, double sample_rate, std::vector<double> data)
      : channels_(channels), sample_rate_(sample_rate), data_(std::move(data)) {
    MASKBENCH_REQUIRE(channels >= 1, invalid_argument, "waveform needs at least one channel");
    MASKBENCH_REQUIRE(sample_rate > 0.0, invalid_argument, "sample rate must be positive");
    MASKBENCH_REQUIRE(data_.size() % channels == 0, shape_mismatch,
                      "channel data lengths differ");
    samples_ = data_.size() / channels;
  }

  std::size_t channels() const noexcept { return channels_; }
  std::size_t samples() const noexcept { return samples_; }
  double sample_rate() const noexcept { return sample_rate_; }
  bool empty() const noexcept { return samples_ == 0; }

  std::span<double> channel(std::size_t c) { return {data_.data() + c * samples_, samples_}; }
  std::span<const double> channel(std::size_t c) const {
    return {data_.data() + c * samples_, samples_};
  }

  double& at(std::size_t c, std::size_t n) { return data_[c * samples_ + n]; }
  double at(std::size_t c, std::size_t n) const { return data_[c * samples_ + n]; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool same_shape(const Waveform& o) const noexcept {
    return channels_ == o.channels_ && samples_ == o.samples_;
  }

 private:
  std::size_t channels_ = 0;
  std::size_t samples_ = 0;
  double sample_rate_ = 1.0;
  std::vector<double> data_;
};

/// Dense (channel, frame, bin) grid. Bins are the fastest-varying index.
template <class V>
class Grid {
 public:
  using value_type = V;

  Grid() = default;
  Grid(std::size_t channels, std::size_t frames, std::size_t bins, V fill = V{})
      : channels_(channels), frames_(frames), bins_(bins),
        data_(channels * frames * bins, fill) {}

  std::size_t channels() const noexcept { return channels_; }
  std::size_t frames() const noexcept { return frames_; }
  std::size_t bins() const noexcept { return bins_; }
  std::size_t size() const noexcept { return data_.size(); }

  V& operator()(std::size_t c, std::size_t t, std::size_t f) {
    return data_[(c * frames_ + t) * bins_ + f];
  }
  const V& operator()(std::size_t c, std::size_t t, std::size_t f) const {
    return data_[(c * frames_ + t) * bins_ + f];
  }
  V& operator[](std::size_t i) { return data_[i]; }
  const V& operator[](std::size_t i) const { return data_[i]; }

  std::span<V> frame(std::size_t c, std::size_t t) {
    return {data_.data() + (c * frames_ + t) * bins_, bins_};
  }
  std::span<const V> frame(std::size_t c, std::size_t t) const {
    return {data_.data() + (c * frames_ + t) * bins_, bins_};
  }

  std::vector<V>& data() noexcept { return data_; }
  const std::vector<V>& data() const noexcept { return data_; }

  template <class U>
  bool same_shape(const Grid<U>& o) const noexcept {
    return channels_ == o.channels() && frames_ == o.frames() && bins_ == o.bins();
  }

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::vector<V> data_;
};

using RealGrid = Grid<double>;
using ComplexGrid = Grid<Complex>;

/// One-sided STFT of every channel of a waveform.
struct ComplexSpectrogram : ComplexGrid {
  ComplexSpectrogram() = default;
  ComplexSpectrogram(std::size_t channels, std::size_t frames, std::size_t bins,
                     std::size_t window, std::size_t hop)
      : ComplexGrid(channels, frames, bins), origin_window(window), origin_hop(hop) {}

  std::size_t origin_window = 0;
  std::size_t origin_hop = 0;
};

template <class A, class B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCategory::shape_mismatch,
                std::string(what) + ": grid shapes differ (" + std::to_string(a.channels()) +
                    "x" + std::to_string(a.frames()) + "x" + std::to_string(a.bins()) +
                    " vs " + std::to_string(b.channels()) + "x" + std::to_string(b.frames()) +
                    "x" + std::to_string(b.bins()) + ")");
  }
}

}  // namespace maskbench

#endif  // MASKBENCH_SIGNAL_HPP
