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

#ifndef MASKBENCH_SDR_HPP
#define MASKBENCH_SDR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/signal.hpp"

namespace maskbench::bss {

constexpr double kDefaultSdrEps = 1e-10;
constexpr double kSdrCapDb = 100.0;

/// Clamp for tabulated output; the raw value stays available to callers.
inline double cap_sdr(double db) { return std::min(db, kSdrCapDb); }

namespace detail {

inline double sdr_from_energies(double ref_energy, double err_energy, double eps) {
  if (ref_energy == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ref_energy / (err_energy + eps));
}

}  // namespace detail

/// 10 log10(||s||^2 / (||s_hat - s||^2 + eps)) over all channels flattened into
/// one vector. An all-zero reference returns -infinity.
inline double sdr(const Waveform& reference, const Waveform& estimate,
                  double eps = kDefaultSdrEps) {
  MASKBENCH_REQUIRE(reference.same_shape(estimate), shape_mismatch,
                    "sdr: reference and estimate differ in length or channel count");
  MASKBENCH_REQUIRE(eps > 0.0, invalid_argument, "sdr eps must be positive");
  double ref = 0.0, err = 0.0;
  const auto& s = reference.data();
  const auto& e = estimate.data();
  for (std::size_t i = 0; i < s.size(); ++i) {
    ref += s[i] * s[i];
    const double d = e[i] - s[i];
    err += d * d;
  }
  return detail::sdr_from_energies(ref, err, eps);
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Median of per-window SDRs over non-overlapping windows of `window_s`
/// seconds. A trailing partial window is dropped and windows whose reference
/// is silent are skipped; if every window is silent the result is -infinity.
inline double windowed_median_sdr(const Waveform& reference, const Waveform& estimate,
                                  double window_s = 1.0, double eps = kDefaultSdrEps) {
  MASKBENCH_REQUIRE(reference.same_shape(estimate), shape_mismatch,
                    "windowed_median_sdr: reference and estimate differ in shape");
  MASKBENCH_REQUIRE(window_s > 0.0, invalid_argument, "window length must be positive");
  MASKBENCH_REQUIRE(eps > 0.0, invalid_argument, "sdr eps must be positive");
  const auto win = static_cast<std::size_t>(std::llround(window_s * reference.sample_rate()));
  MASKBENCH_REQUIRE(win >= 1 && reference.samples() >= win, invalid_argument,
                    "signal is shorter than one evaluation window");
  const std::size_t count = reference.samples() / win;
  std::vector<double> scores;
  for (std::size_t w = 0; w < count; ++w) {
    double ref = 0.0, err = 0.0;
    for (std::size_t c = 0; c < reference.channels(); ++c) {
      const auto s = reference.channel(c);
      const auto e = estimate.channel(c);
      for (std::size_t n = w * win; n < (w + 1) * win; ++n) {
        ref += s[n] * s[n];
        const double d = e[n] - s[n];
        err += d * d;
      }
    }
    if (ref == 0.0) continue;
    scores.push_back(detail::sdr_from_energies(ref, err, eps));
  }
  if (scores.empty()) return -std::numeric_limits<double>::infinity();
  return median(std::move(scores));
}

}  // namespace maskbench::bss

#endif  // MASKBENCH_SDR_HPP
