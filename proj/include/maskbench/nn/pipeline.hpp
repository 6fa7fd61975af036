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

#ifndef MASKBENCH_NN_PIPELINE_HPP
#define MASKBENCH_NN_PIPELINE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/masks.hpp"
#include "maskbench/nn/model.hpp"
#include "maskbench/nn/tensor.hpp"
#include "maskbench/signal.hpp"
#include "maskbench/stft.hpp"

namespace maskbench::nn {

/// Stacks magnitude grids of equal shape into an (N, C, T, F) tensor.
template <class T>
Tensor4<T> stack_grids(const std::vector<const RealGrid*>& grids) {
  MASKBENCH_REQUIRE(!grids.empty(), invalid_argument, "no grids to stack");
  const RealGrid& g0 = *grids.front();
  Tensor4<T> out(grids.size(), g0.channels(), g0.frames(), g0.bins());
  const std::size_t per = g0.size();
  for (std::size_t n = 0; n < grids.size(); ++n) {
    require_same_shape(*grids[n], g0, "stack_grids");
    for (std::size_t i = 0; i < per; ++i) out[n * per + i] = static_cast<T>((*grids[n])[i]);
  }
  return out;
}

/// Example `n` of a tensor as a (C, T, F) grid.
template <class T>
RealGrid unstack_grid(const Tensor4<T>& t, std::size_t n) {
  RealGrid g(t.c(), t.h(), t.w());
  const std::size_t per = g.size();
  for (std::size_t i = 0; i < per; ++i) g[i] = static_cast<double>(t[n * per + i]);
  return g;
}

/// Turns the head outputs of one example into a source spectrogram:
///   |S| = relu(M_mag |X| + Q),  (cos, sin) = (P_r, P_i) / sqrt(P_r^2 + P_i^2 + eps)
///   S   = |S| e^{j(angle M + angle X)}
/// Absent heads fall back to Q = 0 and the mixture phase. backward() maps a
/// gradient with respect to (Re S, Im S) to gradients of the heads.
class HeadCombiner {
 public:
  struct Heads {
    const RealGrid* mask = nullptr;
    const RealGrid* direct = nullptr;      // optional
    const RealGrid* phase_real = nullptr;  // optional, together with phase_imag
    const RealGrid* phase_imag = nullptr;
  };
  struct HeadGrads {
    RealGrid mask, direct, phase_real, phase_imag;
  };

  explicit HeadCombiner(double eps = masks::kDefaultCirmEps) : eps_(eps) {
    MASKBENCH_REQUIRE(eps > 0.0, invalid_argument, "phase normalisation eps must be positive");
  }

  ComplexSpectrogram forward(const Heads& h, const ComplexSpectrogram& mixture) {
    MASKBENCH_REQUIRE(h.mask != nullptr, invalid_argument, "mask head is required");
    MASKBENCH_REQUIRE((h.phase_real == nullptr) == (h.phase_imag == nullptr), invalid_argument,
                      "phase heads come in pairs");
    require_same_shape(*h.mask, mixture, "combine heads");
    if (h.direct) require_same_shape(*h.direct, mixture, "combine heads");
    if (h.phase_real) {
      require_same_shape(*h.phase_real, mixture, "combine heads");
      require_same_shape(*h.phase_imag, mixture, "combine heads");
    }
    heads_ = h;
    mixture_ = &mixture;
    const std::size_t n = mixture.size();
    pre_relu_.assign(n, 0.0);
    cos_.assign(n, 1.0);
    sin_.assign(n, 0.0);
    ComplexSpectrogram out = mixture;
    for (std::size_t i = 0; i < n; ++i) {
      const double xm = std::abs(mixture[i]);
      const double pre = (*h.mask)[i] * xm + (h.direct ? (*h.direct)[i] : 0.0);
      pre_relu_[i] = pre;
      const double mag = std::max(0.0, pre);
      if (h.phase_real) {
        const double pr = (*h.phase_real)[i], pi = (*h.phase_imag)[i];
        const double d = std::sqrt(pr * pr + pi * pi + eps_);
        cos_[i] = pr / d;
        sin_[i] = pi / d;
      }
      const auto [cx, sx] = unit(mixture[i], xm);
      out[i] = Complex(mag * (cos_[i] * cx - sin_[i] * sx), mag * (sin_[i] * cx + cos_[i] * sx));
    }
    return out;
  }

  HeadGrads backward(const ComplexGrid& grad) const {
    MASKBENCH_REQUIRE(mixture_ != nullptr, state, "head combiner backward without forward");
    require_same_shape(grad, *mixture_, "combine heads backward");
    const ComplexSpectrogram& x = *mixture_;
    const std::size_t C = x.channels(), T = x.frames(), F = x.bins();
    HeadGrads g{RealGrid(C, T, F), RealGrid(C, T, F), RealGrid(C, T, F), RealGrid(C, T, F)};
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xm = std::abs(x[i]);
      const auto [cx, sx] = unit(x[i], xm);
      const double gr = grad[i].real(), gi = grad[i].imag();
      const double c = cos_[i], s = sin_[i];
      const double mag = std::max(0.0, pre_relu_[i]);
      const double g_mag = gr * (c * cx - s * sx) + gi * (s * cx + c * sx);
      const double g_pre = pre_relu_[i] > 0.0 ? g_mag : 0.0;
      g.mask[i] = g_pre * xm;
      g.direct[i] = g_pre;
      if (heads_.phase_real) {
        const double g_c = mag * (gr * cx + gi * sx);
        const double g_s = mag * (gi * cx - gr * sx);
        const double pr = (*heads_.phase_real)[i], pi = (*heads_.phase_imag)[i];
        const double d2 = pr * pr + pi * pi + eps_;
        const double d3 = d2 * std::sqrt(d2);
        g.phase_real[i] = (g_c * (pi * pi + eps_) - g_s * pr * pi) / d3;
        g.phase_imag[i] = (g_s * (pr * pr + eps_) - g_c * pr * pi) / d3;
      }
    }
    return g;
  }

 private:
  static std::pair<double, double> unit(Complex x, double xm) {
    return xm > 0.0 ? std::pair{x.real() / xm, x.imag() / xm} : std::pair{1.0, 0.0};
  }

  double eps_;
  Heads heads_;
  const ComplexSpectrogram* mixture_ = nullptr;
  std::vector<double> pre_relu_, cos_, sin_;
};

/// Grids of example `n` in a HeadOutputs batch, in combiner form.
struct HeadGrids {
  RealGrid mask, direct, phase_real, phase_imag;
  bool has_direct = false, has_phase = false;

  HeadCombiner::Heads view() const {
    return {&mask, has_direct ? &direct : nullptr, has_phase ? &phase_real : nullptr,
            has_phase ? &phase_imag : nullptr};
  }
};

template <class T>
HeadGrids head_grids(const HeadOutputs<T>& h, std::size_t n) {
  HeadGrids g;
  g.mask = unstack_grid(h.mask_magnitude, n);
  if (!h.direct.empty()) {
    g.direct = unstack_grid(h.direct, n);
    g.has_direct = true;
  }
  if (!h.phase_real.empty()) {
    g.phase_real = unstack_grid(h.phase_real, n);
    g.phase_imag = unstack_grid(h.phase_imag, n);
    g.has_phase = true;
  }
  return g;
}

/// Magnitude-spectrogram input to the model for a mixture spectrogram.
template <class T>
Tensor4<T> model_input(const ComplexSpectrogram& mixture) {
  const RealGrid mag = dsp::magnitude(mixture);
  return stack_grids<T>({&mag});
}

/// Full separation: stft, network, head combination, reconstruction and
/// istft, truncated to the input length. Runs the model in eval mode.
template <class T>
Waveform separate(Model<T>& model, const Waveform& mixture, const dsp::StftConfig& cfg) {
  MASKBENCH_REQUIRE(mixture.channels() == model.config().input_channels, shape_mismatch,
                    "model expects " + std::to_string(model.config().input_channels) +
                        " channels, mixture has " + std::to_string(mixture.channels()));
  MASKBENCH_REQUIRE(cfg.bins() == model.config().freq_bins, shape_mismatch,
                    "stft gives " + std::to_string(cfg.bins()) + " bins, model expects " +
                        std::to_string(model.config().freq_bins));
  const ComplexSpectrogram x = dsp::stft(mixture, cfg);
  const bool was_training = model.training();
  model.set_training(false);
  const HeadOutputs<T> heads = model.forward(model_input<T>(x));
  model.set_training(was_training);
  const HeadGrids g = head_grids(heads, 0);
  HeadCombiner combiner;
  const ComplexSpectrogram s = combiner.forward(g.view(), x);
  return dsp::istft(s, cfg, mixture.samples(), mixture.sample_rate());
}

}  // namespace maskbench::nn

#endif  // MASKBENCH_NN_PIPELINE_HPP
