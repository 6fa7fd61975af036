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

#ifndef MASKBENCH_NN_TRAIN_HPP
#define MASKBENCH_NN_TRAIN_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/nn/model.hpp"
#include "maskbench/nn/pipeline.hpp"
#include "maskbench/signal.hpp"
#include "maskbench/stft.hpp"

namespace maskbench::nn {

/// Mean absolute sample difference over channels and time.
inline double waveform_l1_loss(const Waveform& est, const Waveform& target) {
  MASKBENCH_REQUIRE(est.same_shape(target), shape_mismatch,
                    "l1 loss: estimate is " + std::to_string(est.channels()) + "x" +
                        std::to_string(est.samples()) + ", target is " +
                        std::to_string(target.channels()) + "x" +
                        std::to_string(target.samples()));
  MASKBENCH_REQUIRE(!est.empty(), invalid_argument, "l1 loss of empty waveforms");
  double s = 0.0;
  for (std::size_t i = 0; i < est.data().size(); ++i)
    s += std::abs(est.data()[i] - target.data()[i]);
  return s / static_cast<double>(est.data().size());
}

/// d loss / d est scaled by `weight`; the subgradient at zero is 0.
inline Waveform waveform_l1_grad(const Waveform& est, const Waveform& target, double weight) {
  Waveform g(est.channels(), est.samples(), est.sample_rate());
  for (std::size_t i = 0; i < est.data().size(); ++i) {
    const double d = est.data()[i] - target.data()[i];
    g.data()[i] = d > 0.0 ? weight : (d < 0.0 ? -weight : 0.0);
  }
  return g;
}

constexpr std::size_t kLrDecayInterval = 15000;
constexpr double kLrDecayFactor = 0.9;

/// base_lr * 0.9^floor(step / 15000).
inline double lr_schedule(std::size_t step, double base_lr) {
  return base_lr * std::pow(kLrDecayFactor, static_cast<double>(step / kLrDecayInterval));
}

/// Base learning rate per source; throws for an unknown source name.
inline double source_learning_rate(const std::string& source) {
  static const std::map<std::string, double> rates{
      {"vocals", 1e-3}, {"accompaniment", 5e-4}, {"bass", 1e-4}, {"drums", 2e-4}, {"other", 5e-4}};
  const auto it = rates.find(source);
  MASKBENCH_REQUIRE(it != rates.end(), invalid_argument,
                    "no learning rate for source '" + source + "'");
  return it->second;
}

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  std::vector<std::vector<double>> m, v;
};

/// One Adam update of every trainable parameter from its accumulated grad.
template <class T>
void adam_update(const std::vector<Parameter<T>*>& params, AdamState& st, double lr) {
  if (st.m.empty()) {
    st.m.resize(params.size());
    st.v.resize(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (!params[k]->trainable) continue;
      st.m[k].assign(params[k]->size(), 0.0);
      st.v[k].assign(params[k]->size(), 0.0);
    }
  }
  MASKBENCH_REQUIRE(st.m.size() == params.size(), state,
                    "optimizer state belongs to a different parameter set");
  ++st.step;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter<T>& p = *params[k];
    if (!p.trainable) continue;
    auto& m = st.m[k];
    auto& v = st.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g;
      v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g * g;
      const double step = lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + st.eps);
      p.value[i] = static_cast<T>(p.value[i] - step);
    }
  }
}

struct TrainingPair {
  Waveform mixture;
  Waveform target;
};

/// Loss and gradient of the whole separation path for a batch; gradients are
/// accumulated into the model parameters (not zeroed here).
template <class T>
double separation_loss_and_grad(Model<T>& model, const std::vector<TrainingPair>& batch,
                                const dsp::StftConfig& cfg) {
  MASKBENCH_REQUIRE(!batch.empty(), invalid_argument, "empty training batch");
  std::vector<ComplexSpectrogram> specs;
  std::vector<RealGrid> mags;
  specs.reserve(batch.size());
  mags.reserve(batch.size());
  std::size_t total = 0;
  for (const auto& p : batch) {
    MASKBENCH_REQUIRE(p.mixture.same_shape(p.target), shape_mismatch,
                      "mixture and target shapes differ");
    MASKBENCH_REQUIRE(p.mixture.same_shape(batch.front().mixture), shape_mismatch,
                      "batch examples differ in shape");
    specs.push_back(dsp::stft(p.mixture, cfg));
    mags.push_back(dsp::magnitude(specs.back()));
    total += p.mixture.data().size();
  }
  std::vector<const RealGrid*> views;
  for (const auto& m : mags) views.push_back(&m);
  const HeadOutputs<T> heads = model.forward(stack_grids<T>(views));

  HeadOutputs<T> grads;
  const auto& d = heads.mask_magnitude.dims();
  grads.mask_magnitude = Tensor4<T>(d[0], d[1], d[2], d[3]);
  if (!heads.direct.empty()) grads.direct = Tensor4<T>(d[0], d[1], d[2], d[3]);
  if (!heads.phase_real.empty()) {
    grads.phase_real = Tensor4<T>(d[0], d[1], d[2], d[3]);
    grads.phase_imag = Tensor4<T>(d[0], d[1], d[2], d[3]);
  }
  auto scatter = [](Tensor4<T>& dst, const RealGrid& src, std::size_t n) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[n * src.size() + i] = static_cast<T>(src[i]);
  };

  double loss_sum = 0.0;
  const double weight = 1.0 / static_cast<double>(total);
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const HeadGrids g = head_grids(heads, n);
    HeadCombiner combiner;
    const ComplexSpectrogram s = combiner.forward(g.view(), specs[n]);
    const Waveform est =
        dsp::istft(s, cfg, batch[n].mixture.samples(), batch[n].mixture.sample_rate());
    loss_sum += waveform_l1_loss(est, batch[n].target) * static_cast<double>(est.data().size());
    const ComplexSpectrogram gs =
        dsp::istft_adjoint(waveform_l1_grad(est, batch[n].target, weight), cfg, s.frames());
    const auto hg = combiner.backward(gs);
    scatter(grads.mask_magnitude, hg.mask, n);
    if (g.has_direct) scatter(grads.direct, hg.direct, n);
    if (g.has_phase) {
      scatter(grads.phase_real, hg.phase_real, n);
      scatter(grads.phase_imag, hg.phase_imag, n);
    }
  }
  model.backward(grads);
  return loss_sum * weight;
}

/// One optimisation step: forward, loss, backward and an Adam update.
/// Returns the loss before the update. A non-finite loss aborts the step
/// before any parameter is touched.
template <class T>
double train_step(Model<T>& model, const std::vector<TrainingPair>& batch, AdamState& adam,
                  double lr, const dsp::StftConfig& cfg) {
  model.set_training(true);
  model.zero_grad();
  const double loss = separation_loss_and_grad(model, batch, cfg);
  if (!std::isfinite(loss)) {
    std::ostringstream os;
    os << "non-finite loss " << loss << " at optimizer step " << adam.step << " (batch of "
       << batch.size() << ", lr " << lr << ")";
    throw Error(ErrorCategory::numeric, os.str());
  }
  adam_update(model.parameters(), adam, lr);
  return loss;
}

/// Synthetic two-source separation problem: the target is a sum of low
/// harmonic tones, the interferer a sum of higher tones plus noise.
struct ToyConfig {
  double sample_rate = 8000.0;
  std::size_t segment_samples = 1024;
  std::size_t channels = 1;
  std::size_t train_examples = 400;
  std::size_t calibration_examples = 64;
  std::size_t batch_size = 2;
  std::size_t steps = 200;
  double learning_rate = 3e-3;
  std::uint64_t seed = 0;
  dsp::StftConfig stft{128, 32, dsp::WindowKind::hann, true};
  std::vector<std::size_t> widths{4, 8};
  std::size_t rcbs_per_block = 1;
  std::size_t intermediate_blocks = 1;
  HeadMode heads = HeadMode::decouple_plus;

  ModelConfig model_config() const {
    ModelConfig c;
    c.architecture = Architecture::resunet;
    c.input_channels = channels;
    c.freq_bins = stft.bins();
    c.widths = widths;
    c.rcbs_per_block = rcbs_per_block;
    c.intermediate_blocks = intermediate_blocks;
    c.heads = heads;
    c.seed = seed;
    return c;
  }
};

inline TrainingPair make_toy_pair(const ToyConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lo(150.0, 600.0), hi(1800.0, 3400.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(0.1, 0.3);
  std::normal_distribution<double> noise(0.0, 0.02);
  Waveform target(cfg.channels, cfg.segment_samples, cfg.sample_rate);
  Waveform interf(cfg.channels, cfg.segment_samples, cfg.sample_rate);
  auto add_tone = [&](Waveform& w, double f, double a) {
    const double p = ph(rng);
    for (std::size_t c = 0; c < w.channels(); ++c)
      for (std::size_t n = 0; n < w.samples(); ++n)
        w.at(c, n) += a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(n) /
                                       cfg.sample_rate + p);
  };
  for (int k = 0; k < 2; ++k) add_tone(target, lo(rng), amp(rng));
  for (int k = 0; k < 2; ++k) add_tone(interf, hi(rng), amp(rng));
  for (auto& v : interf.data()) v += noise(rng);
  Waveform mix = target;
  for (std::size_t i = 0; i < mix.data().size(); ++i) mix.data()[i] += interf.data()[i];
  return {std::move(mix), std::move(target)};
}

inline std::vector<TrainingPair> make_toy_dataset(const ToyConfig& cfg, std::size_t count,
                                                  std::uint64_t stream) {
  std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(stream)));
  std::vector<TrainingPair> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(make_toy_pair(cfg, rng));
  return out;
}

/// Re-estimates every batch-norm running statistic as the plain average over
/// the given mixtures (in batches of `batch_size`), replacing the short
/// momentum history left by training.
template <class T>
void calibrate_batch_norm(Model<T>& model, const std::vector<TrainingPair>& data,
                          std::size_t batch_size, const dsp::StftConfig& cfg) {
  MASKBENCH_REQUIRE(batch_size >= 1, invalid_argument, "batch size must be >= 1");
  const bool was_training = model.training();
  model.set_training(true);
  model.set_calibration(true);
  for (std::size_t start = 0; start + batch_size <= data.size(); start += batch_size) {
    std::vector<RealGrid> mags;
    for (std::size_t b = start; b < start + batch_size; ++b)
      mags.push_back(dsp::magnitude(dsp::stft(data[b].mixture, cfg)));
    std::vector<const RealGrid*> views;
    for (const auto& m : mags) views.push_back(&m);
    model.forward(stack_grids<T>(views));
  }
  model.set_calibration(false);
  model.set_training(was_training);
}

struct ToyRun {
  std::vector<double> losses;  // one per step, before the update
};

/// Seeded toy training loop. `on_step(step, loss)` is called after every step.
template <class T>
ToyRun train_toy(Model<T>& model, const ToyConfig& cfg,
                 const std::function<void(std::size_t, double)>& on_step = {}) {
  const auto data = make_toy_dataset(cfg, cfg.train_examples, 1);
  MASKBENCH_REQUIRE(cfg.batch_size >= 1, invalid_argument, "batch size must be >= 1");
  ToyRun run;
  AdamState adam;
  std::vector<TrainingPair> batch;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    batch.clear();
    for (std::size_t b = 0; b < cfg.batch_size; ++b)
      batch.push_back(data[(step * cfg.batch_size + b) % data.size()]);
    const double loss =
        train_step(model, batch, adam, lr_schedule(step, cfg.learning_rate), cfg.stft);
    run.losses.push_back(loss);
    if (on_step) on_step(step, loss);
  }
  if (cfg.calibration_examples > 0)
    calibrate_batch_norm(model, make_toy_dataset(cfg, cfg.calibration_examples, 2),
                         cfg.batch_size, cfg.stft);
  return run;
}

}  // namespace maskbench::nn

#endif  // MASKBENCH_NN_TRAIN_HPP
