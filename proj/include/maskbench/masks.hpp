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

#ifndef MASKBENCH_MASKS_HPP
#define MASKBENCH_MASKS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "maskbench/error.hpp"
#include "maskbench/signal.hpp"

namespace maskbench::masks {

/// Complex ratio mask over a spectrogram grid.
struct ComplexMask : ComplexGrid {
  ComplexMask() = default;
  ComplexMask(std::size_t channels, std::size_t frames, std::size_t bins, Complex fill = {})
      : ComplexGrid(channels, frames, bins, fill) {}
  explicit ComplexMask(ComplexGrid g) : ComplexGrid(std::move(g)) {}
};

/// Non-negative real mask, optionally bounded above.
struct MagnitudeMask : RealGrid {
  MagnitudeMask() = default;
  MagnitudeMask(std::size_t channels, std::size_t frames, std::size_t bins, double fill = 0.0)
      : RealGrid(channels, frames, bins, fill) {}

  std::optional<double> bound;
};

/// Unnormalised phase outputs, real and imaginary parts of the estimated mask.
struct PhaseHeads {
  RealGrid real;
  RealGrid imag;
};

/// cos and sin of the mask angle recovered from PhaseHeads.
struct PhaseFactors {
  RealGrid cos;
  RealGrid sin;
};

constexpr double kDefaultCirmEps = 1e-10;
constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// M = S / X, expanded as
///   (S_r X_r + S_i X_i + i (S_i X_r - S_r X_i)) / (X_r^2 + X_i^2 + eps).
/// With eps = 0 a zero mixture bin yields a non-finite mask value.
inline ComplexMask compute_cirm(const ComplexGrid& source, const ComplexGrid& mixture,
                                double eps = kDefaultCirmEps) {
  require_same_shape(source, mixture, "compute_cirm");
  MASKBENCH_REQUIRE(eps >= 0.0, invalid_argument, "cIRM eps must be non-negative");
  ComplexMask m(mixture.channels(), mixture.frames(), mixture.bins());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double sr = source[i].real(), si = source[i].imag();
    const double xr = mixture[i].real(), xi = mixture[i].imag();
    const double den = xr * xr + xi * xi + eps;
    m[i] = Complex((sr * xr + si * xi) / den, (si * xr - sr * xi) / den);
  }
  return m;
}

/// Elementwise complex product M * X: a magnitude scaling by |M| and a phase
/// rotation by angle(M).
template <class Spec>
Spec apply_complex_mask(const ComplexGrid& mask, const Spec& mixture) {
  require_same_shape(mask, mixture, "apply_complex_mask");
  Spec out = mixture;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] * mixture[i];
  return out;
}

/// 1 where the target dominates the residual, |S| >= |X - S|, else 0.
inline MagnitudeMask ideal_binary_mask(const ComplexGrid& source, const ComplexGrid& mixture) {
  require_same_shape(source, mixture, "ideal_binary_mask");
  MagnitudeMask m(mixture.channels(), mixture.frames(), mixture.bins());
  for (std::size_t i = 0; i < m.size(); ++i)
    m[i] = std::abs(source[i]) >= std::abs(mixture[i] - source[i]) ? 1.0 : 0.0;
  m.bound = 1.0;
  return m;
}

/// |S| / (|X| + eps), clipped to [0, bound] when the bound is finite.
inline MagnitudeMask ideal_ratio_mask(const ComplexGrid& source, const ComplexGrid& mixture,
                                      double bound = kUnbounded, double eps = kDefaultCirmEps) {
  require_same_shape(source, mixture, "ideal_ratio_mask");
  MASKBENCH_REQUIRE(bound > 0.0, invalid_argument, "IRM bound must be positive");
  MagnitudeMask m(mixture.channels(), mixture.frames(), mixture.bins());
  const bool finite = std::isfinite(bound);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double r = std::abs(source[i]) / (std::abs(mixture[i]) + eps);
    m[i] = finite ? std::min(r, bound) : r;
  }
  if (finite) m.bound = bound;
  return m;
}

/// Rescales every value with |M| > limit onto the circle of radius `limit`;
/// the angle is untouched.
inline ComplexMask clip_mask_magnitude(const ComplexMask& mask, double limit) {
  MASKBENCH_REQUIRE(limit > 0.0, invalid_argument, "mask limit must be positive");
  ComplexMask out = mask;
  if (!std::isfinite(limit)) return out;
  for (auto& v : out.data()) {
    const double mag = std::abs(v);
    if (mag > limit) v *= limit / mag;
  }
  return out;
}

/// Builds a spectrogram with the given magnitude and the mixture's phase.
/// A zero mixture bin contributes phase 0.
template <class Spec>
Spec apply_magnitude_with_mixture_phase(const RealGrid& magnitude, const Spec& mixture) {
  require_same_shape(magnitude, mixture, "apply_magnitude_with_mixture_phase");
  Spec out = mixture;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double xm = std::abs(mixture[i]);
    out[i] = xm > 0.0 ? mixture[i] * (magnitude[i] / xm) : Complex(magnitude[i], 0.0);
  }
  return out;
}

/// Magnitude mask applied to the mixture (phase kept from the mixture).
template <class Spec>
Spec apply_magnitude_mask(const RealGrid& mask, const Spec& mixture) {
  require_same_shape(mask, mixture, "apply_magnitude_mask");
  Spec out = mixture;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] * mixture[i];
  return out;
}

/// cos = P_r / sqrt(P_r^2 + P_i^2 + eps), sin = P_i / sqrt(P_r^2 + P_i^2 + eps).
/// Both are 0 when the heads are both 0.
inline PhaseFactors decouple_phase(const PhaseHeads& heads, double eps = kDefaultCirmEps) {
  require_same_shape(heads.real, heads.imag, "decouple_phase");
  MASKBENCH_REQUIRE(eps > 0.0, invalid_argument, "decouple_phase eps must be positive");
  PhaseFactors out{RealGrid(heads.real.channels(), heads.real.frames(), heads.real.bins()),
                   RealGrid(heads.real.channels(), heads.real.frames(), heads.real.bins())};
  for (std::size_t i = 0; i < heads.real.size(); ++i) {
    const double pr = heads.real[i], pi = heads.imag[i];
    const double d = std::sqrt(pr * pr + pi * pi + eps);
    out.cos[i] = pr / d;
    out.sin[i] = pi / d;
  }
  return out;
}

/// M = M_mag cos + j M_mag sin.
inline ComplexMask recover_cirm(const RealGrid& mask_magnitude, const PhaseFactors& phase) {
  require_same_shape(mask_magnitude, phase.cos, "recover_cirm");
  require_same_shape(mask_magnitude, phase.sin, "recover_cirm");
  ComplexMask m(mask_magnitude.channels(), mask_magnitude.frames(), mask_magnitude.bins());
  for (std::size_t i = 0; i < m.size(); ++i)
    m[i] = Complex(mask_magnitude[i] * phase.cos[i], mask_magnitude[i] * phase.sin[i]);
  return m;
}

/// |S| = relu(M_mag |X| + Q).
inline RealGrid combine_mask_direct(const RealGrid& mask_magnitude,
                                    const RealGrid& mixture_magnitude, const RealGrid& direct) {
  require_same_shape(mask_magnitude, mixture_magnitude, "combine_mask_direct");
  require_same_shape(mask_magnitude, direct, "combine_mask_direct");
  RealGrid out(mask_magnitude.channels(), mask_magnitude.frames(), mask_magnitude.bins());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::max(0.0, mask_magnitude[i] * mixture_magnitude[i] + direct[i]);
  return out;
}

/// S = |S| e^{j (angle(M) + angle(X))}, expanded by the angle-addition
/// identities from (cos, sin) of the mask angle and of the mixture angle.
template <class Spec>
Spec reconstruct_stft(const RealGrid& source_magnitude, const PhaseFactors& phase,
                      const Spec& mixture) {
  require_same_shape(source_magnitude, mixture, "reconstruct_stft");
  require_same_shape(phase.cos, mixture, "reconstruct_stft");
  require_same_shape(phase.sin, mixture, "reconstruct_stft");
  Spec out = mixture;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double xm = std::abs(mixture[i]);
    const double cx = xm > 0.0 ? mixture[i].real() / xm : 1.0;
    const double sx = xm > 0.0 ? mixture[i].imag() / xm : 0.0;
    const double c = phase.cos[i], s = phase.sin[i];
    out[i] = Complex(source_magnitude[i] * (c * cx - s * sx),
                     source_magnitude[i] * (s * cx + c * sx));
  }
  return out;
}

}  // namespace maskbench::masks

#endif  // MASKBENCH_MASKS_HPP
