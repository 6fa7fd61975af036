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

#ifndef MASKBENCH_NN_MODEL_HPP
#define MASKBENCH_NN_MODEL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/nn/layers.hpp"
#include "maskbench/nn/tensor.hpp"

namespace maskbench::nn {

enum class Architecture { unet, resunet };

/// Output heads per mixture channel: magnitude mask only, mask + phase
/// (decouple), or mask + direct magnitude + phase (decouple+).
enum class HeadMode { mask_only = 1, decouple = 3, decouple_plus = 4 };

inline std::size_t heads_per_channel(HeadMode m) { return static_cast<std::size_t>(m); }

struct ModelConfig {
  Architecture architecture = Architecture::resunet;
  std::size_t input_channels = 2;
  std::size_t freq_bins = 1025;
  /// Channel width of each encoder level; the depth is widths.size().
  std::vector<std::size_t> widths{8, 16, 32, 64, 64, 64};
  std::size_t rcbs_per_block = 4;
  std::size_t intermediate_blocks = 4;
  HeadMode heads = HeadMode::decouple_plus;
  double leaky_slope = 0.01;
  /// Zero the second convolution of every residual block, so each block
  /// starts as its shortcut.
  bool zero_init_residual = false;
  std::uint64_t seed = 0;

  std::size_t depth() const noexcept { return widths.size(); }
  std::size_t output_channels() const noexcept {
    return heads_per_channel(heads) * input_channels;
  }
  std::size_t spatial_multiple() const noexcept { return std::size_t{1} << depth(); }

  void validate() const {
    MASKBENCH_REQUIRE(input_channels >= 1, invalid_argument, "model needs >= 1 input channel");
    MASKBENCH_REQUIRE(freq_bins >= 1, invalid_argument, "model needs >= 1 frequency bin");
    MASKBENCH_REQUIRE(!widths.empty(), invalid_argument, "model needs at least one level");
    for (auto w : widths) MASKBENCH_REQUIRE(w >= 1, invalid_argument, "model widths must be >= 1");
    if (architecture == Architecture::resunet)
      MASKBENCH_REQUIRE(rcbs_per_block >= 1, invalid_argument,
                        "residual blocks need at least one RCB");
  }
};

/// Six-level UNet with two convolutions per encoder level and three per
/// decoder level plus three output convolutions (33 in total at depth 6).
inline ModelConfig unet33_config(std::vector<std::size_t> widths = {8, 16, 32, 64, 64, 64}) {
  ModelConfig c;
  c.architecture = Architecture::unet;
  c.widths = std::move(widths);
  return c;
}

/// Six REBs, four ICBs, six RDBs, a final ICB and a J-channel output conv,
/// each residual block holding four two-convolution RCBs (143 in total).
inline ModelConfig resunet143_config(std::vector<std::size_t> widths = {8, 16, 32, 64, 64, 64}) {
  ModelConfig c;
  c.architecture = Architecture::resunet;
  c.widths = std::move(widths);
  c.rcbs_per_block = 4;
  c.intermediate_blocks = 4;
  return c;
}

enum class BlockKind {
  input_bn,
  conv3x3,
  conv1x1,
  transposed_conv3x3_stride2,
  batch_norm,
  leaky_relu,
  avg_pool2x2,
  rcb,
  reb,
  rdb,
  icb,
  skip_concat,
  output_heads,
};

inline const char* block_kind_name(BlockKind k) {
  switch (k) {
    case BlockKind::input_bn: return "input_bn";
    case BlockKind::conv3x3: return "conv3x3";
    case BlockKind::conv1x1: return "conv1x1";
    case BlockKind::transposed_conv3x3_stride2: return "transposed_conv3x3_stride2";
    case BlockKind::batch_norm: return "batch_norm";
    case BlockKind::leaky_relu: return "leaky_relu";
    case BlockKind::avg_pool2x2: return "avg_pool2x2";
    case BlockKind::rcb: return "rcb";
    case BlockKind::reb: return "reb";
    case BlockKind::rdb: return "rdb";
    case BlockKind::icb: return "icb";
    case BlockKind::skip_concat: return "skip_concat";
    case BlockKind::output_heads: return "output_heads";
  }
  return "?";
}

/// One node of the ordered block graph.
struct BlockInfo {
  std::string name;
  BlockKind kind;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  int conv_layers = 0;
  std::size_t inner_blocks = 0;  // RCBs inside reb/rdb/icb
  int skip_from_level = -1;      // encoder level feeding a skip_concat
  int decoder_level = -1;        // decoder level receiving it (execution order)
};

/// Pre-activation residual convolutional block:
///   y = conv(act(bn(conv(act(bn(x)))))) + shortcut(x)
/// The shortcut is the identity, or an uncounted 1x1 projection when the
/// widths differ.
template <class T>
class Rcb : public Module<T> {
 public:
  Rcb(const std::string& name, std::size_t in_c, std::size_t out_c, const InitOptions& init,
      bool zero_last)
      : bn1_(name + ".bn1", in_c, 1), act1_(init.leaky_slope),
        conv1_(name + ".conv1", in_c, out_c, 3, init, true, false), bn2_(name + ".bn2", out_c, 1),
        act2_(init.leaky_slope), conv2_(name + ".conv2", out_c, out_c, 3, init) {
    if (in_c != out_c)
      shortcut_ = std::make_unique<Conv2d<T>>(name + ".shortcut", in_c, out_c, 1, init, false, false);
    if (zero_last) std::fill(conv2_.weight().value.begin(), conv2_.weight().value.end(), T(0));
  }

  Tensor4<T> forward(const Tensor4<T>& x) override {
    Tensor4<T> y = conv2_.forward(act2_.forward(bn2_.forward(
        conv1_.forward(act1_.forward(bn1_.forward(x))))));
    add_into(y, shortcut_ ? shortcut_->forward(x) : x);
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& gy) override {
    Tensor4<T> gx = bn1_.backward(act1_.backward(conv1_.backward(
        bn2_.backward(act2_.backward(conv2_.backward(gy))))));
    add_into(gx, shortcut_ ? shortcut_->backward(gy) : gy);
    return gx;
  }

  void collect_parameters(std::vector<Parameter<T>*>& out) override {
    bn1_.collect_parameters(out);
    conv1_.collect_parameters(out);
    bn2_.collect_parameters(out);
    conv2_.collect_parameters(out);
    if (shortcut_) shortcut_->collect_parameters(out);
  }
  void set_training(bool t) override {
    bn1_.set_training(t);
    bn2_.set_training(t);
  }
  void set_calibration(bool on) override {
    bn1_.set_calibration(on);
    bn2_.set_calibration(on);
  }
  int conv_layers() const override { return conv1_.conv_layers() + conv2_.conv_layers(); }

 private:
  BatchNorm<T> bn1_;
  LeakyRelu<T> act1_;
  Conv2d<T> conv1_;
  BatchNorm<T> bn2_;
  LeakyRelu<T> act2_;
  Conv2d<T> conv2_;
  std::unique_ptr<Conv2d<T>> shortcut_;
};

/// Stack of RCBs; the body of REB, ICB and RDB.
template <class T>
std::unique_ptr<Sequential<T>> make_residual_stack(const std::string& name, std::size_t in_c,
                                                   std::size_t out_c, std::size_t count,
                                                   const InitOptions& init, bool zero_last) {
  auto s = std::make_unique<Sequential<T>>();
  for (std::size_t i = 0; i < count; ++i)
    s->template add<Rcb<T>>(name + ".rcb" + std::to_string(i), i == 0 ? in_c : out_c, out_c, init,
                            zero_last);
  return s;
}

/// conv3x3 -> batch norm -> leaky relu, the plain UNet unit.
template <class T>
void add_conv_unit(Sequential<T>& s, const std::string& name, std::size_t in_c,
                   std::size_t out_c, const InitOptions& init) {
  s.template add<Conv2d<T>>(name + ".conv", in_c, out_c, 3, init, true, false);
  s.template add<BatchNorm<T>>(name + ".bn", out_c, 1);
  s.template add<LeakyRelu<T>>(init.leaky_slope);
}

/// Network outputs, each (batch, mixture channels, frames, bins). Heads not
/// produced by the configured HeadMode are left empty.
template <class T>
struct HeadOutputs {
  Tensor4<T> mask_magnitude;  // sigmoid, in (0, 1)
  Tensor4<T> direct;          // linear
  Tensor4<T> phase_real;      // linear
  Tensor4<T> phase_imag;      // linear
};

/// UNet / residual UNet mapping a magnitude spectrogram stack to the output
/// heads. forward() caches what backward() needs; a model instance is not
/// re-entrant.
template <class T>
class Model {
 public:
  explicit Model(ModelConfig cfg)
      : cfg_((cfg.validate(), std::move(cfg))), input_bn_("input_bn", cfg_.freq_bins, 3) {
    const InitOptions init{cfg_.seed, cfg_.leaky_slope};
    const std::size_t depth = cfg_.depth();
    const bool res = cfg_.architecture == Architecture::resunet;
    const bool z = cfg_.zero_init_residual;

    std::size_t c = cfg_.input_channels;
    for (std::size_t k = 0; k < depth; ++k) {
      const std::string name = "encoder" + std::to_string(k);
      const std::size_t w = cfg_.widths[k];
      if (res) {
        encoders_.push_back(make_residual_stack<T>(name, c, w, cfg_.rcbs_per_block, init, z));
      } else {
        auto s = std::make_unique<Sequential<T>>();
        add_conv_unit(*s, name + ".0", c, w, init);
        add_conv_unit(*s, name + ".1", w, w, init);
        encoders_.push_back(std::move(s));
      }
      pools_.push_back(std::make_unique<AvgPool2<T>>());
      c = w;
    }
    if (res) {
      for (std::size_t j = 0; j < cfg_.intermediate_blocks; ++j)
        intermediates_.push_back(make_residual_stack<T>("intermediate" + std::to_string(j), c, c,
                                                        cfg_.rcbs_per_block, init, z));
    }
    for (std::size_t d = 0; d < depth; ++d) {
      const std::size_t level = depth - 1 - d;
      const std::size_t w = cfg_.widths[level];
      const std::string name = "decoder" + std::to_string(d);
      ups_.push_back(std::make_unique<ConvTranspose2d<T>>(name + ".up", c, w, init));
      if (res) {
        decoders_.push_back(make_residual_stack<T>(name, 2 * w, w, cfg_.rcbs_per_block, init, z));
      } else {
        auto s = std::make_unique<Sequential<T>>();
        add_conv_unit(*s, name + ".0", 2 * w, w, init);
        add_conv_unit(*s, name + ".1", w, w, init);
        decoders_.push_back(std::move(s));
      }
      c = w;
    }
    if (res) {
      final_ = make_residual_stack<T>("final_icb", c, c, cfg_.rcbs_per_block, init, z);
    } else {
      final_ = std::make_unique<Sequential<T>>();
      add_conv_unit(*final_, "final.0", c, c, init);
      add_conv_unit(*final_, "final.1", c, c, init);
    }
    head_ = std::make_unique<Conv2d<T>>("head", c, cfg_.output_channels(), 1, init);
    set_training(true);
  }

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const noexcept { return cfg_; }

  void set_training(bool t) {
    training_ = t;
    input_bn_.set_training(t);
    for (auto& m : encoders_) m->set_training(t);
    for (auto& m : intermediates_) m->set_training(t);
    for (auto& m : decoders_) m->set_training(t);
    final_->set_training(t);
  }
  bool training() const noexcept { return training_; }

  void set_calibration(bool on) {
    input_bn_.set_calibration(on);
    for (auto& m : encoders_) m->set_calibration(on);
    for (auto& m : intermediates_) m->set_calibration(on);
    for (auto& m : decoders_) m->set_calibration(on);
    final_->set_calibration(on);
  }

  /// All parameters and buffers in a fixed order.
  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> out;
    input_bn_.collect_parameters(out);
    for (std::size_t k = 0; k < encoders_.size(); ++k) encoders_[k]->collect_parameters(out);
    for (auto& m : intermediates_) m->collect_parameters(out);
    for (std::size_t d = 0; d < decoders_.size(); ++d) {
      ups_[d]->collect_parameters(out);
      decoders_[d]->collect_parameters(out);
    }
    final_->collect_parameters(out);
    head_->collect_parameters(out);
    return out;
  }

  std::size_t trainable_parameter_count() {
    std::size_t n = 0;
    for (auto* p : parameters())
      if (p->trainable) n += p->size();
    return n;
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }

  Conv2d<T>& head() { return *head_; }

  /// Convolution count from the instantiated modules.
  int module_conv_layers() const {
    int n = 0;
    for (const auto& m : encoders_) n += m->conv_layers();
    for (const auto& m : intermediates_) n += m->conv_layers();
    for (std::size_t d = 0; d < decoders_.size(); ++d)
      n += ups_[d]->conv_layers() + decoders_[d]->conv_layers();
    n += final_->conv_layers() + head_->conv_layers();
    return n;
  }

  /// Ordered block graph derived from the configuration.
  std::vector<BlockInfo> describe() const {
    std::vector<BlockInfo> g;
    const std::size_t depth = cfg_.depth();
    const bool res = cfg_.architecture == Architecture::resunet;
    const int rcb_convs = 2 * static_cast<int>(cfg_.rcbs_per_block);
    g.push_back({"input_bn", BlockKind::input_bn, cfg_.input_channels, cfg_.input_channels});
    std::size_t c = cfg_.input_channels;
    auto plain_unit = [&](const std::string& name, std::size_t in, std::size_t out) {
      g.push_back({name + ".conv", BlockKind::conv3x3, in, out, 1});
      g.push_back({name + ".bn", BlockKind::batch_norm, out, out});
      g.push_back({name + ".act", BlockKind::leaky_relu, out, out});
    };
    for (std::size_t k = 0; k < depth; ++k) {
      const std::size_t w = cfg_.widths[k];
      const std::string name = "encoder" + std::to_string(k);
      if (res) {
        g.push_back({name, BlockKind::reb, c, w, rcb_convs, cfg_.rcbs_per_block});
      } else {
        plain_unit(name + ".0", c, w);
        plain_unit(name + ".1", w, w);
      }
      g.push_back({name + ".pool", BlockKind::avg_pool2x2, w, w});
      c = w;
    }
    if (res)
      for (std::size_t j = 0; j < cfg_.intermediate_blocks; ++j)
        g.push_back({"intermediate" + std::to_string(j), BlockKind::icb, c, c, rcb_convs,
                     cfg_.rcbs_per_block});
    for (std::size_t d = 0; d < depth; ++d) {
      const std::size_t level = depth - 1 - d;
      const std::size_t w = cfg_.widths[level];
      const std::string name = "decoder" + std::to_string(d);
      if (res) {
        g.push_back({name, BlockKind::rdb, c, w, 1 + rcb_convs, cfg_.rcbs_per_block});
        g.push_back({name + ".skip", BlockKind::skip_concat, w, 2 * w, 0, 0,
                     static_cast<int>(level), static_cast<int>(d)});
      } else {
        g.push_back({name + ".up", BlockKind::transposed_conv3x3_stride2, c, w, 1});
        g.push_back({name + ".skip", BlockKind::skip_concat, w, 2 * w, 0, 0,
                     static_cast<int>(level), static_cast<int>(d)});
        plain_unit(name + ".0", 2 * w, w);
        plain_unit(name + ".1", w, w);
      }
      c = w;
    }
    if (res) {
      g.push_back({"final_icb", BlockKind::icb, c, c, rcb_convs, cfg_.rcbs_per_block});
    } else {
      plain_unit("final.0", c, c);
      plain_unit("final.1", c, c);
    }
    g.push_back({"head", BlockKind::output_heads, c, cfg_.output_channels(), 1});
    return g;
  }

  /// Runs the backbone on an already padded (N, C, T, F) tensor whose T and F
  /// are multiples of 2^depth; returns the raw J-channel output.
  Tensor4<T> forward_backbone(const Tensor4<T>& x) {
    const std::size_t m = cfg_.spatial_multiple();
    MASKBENCH_REQUIRE(x.c() == cfg_.input_channels, shape_mismatch,
                      "model expects " + std::to_string(cfg_.input_channels) +
                          " input channels, got " + x.shape_string());
    MASKBENCH_REQUIRE(x.h() % m == 0 && x.w() % m == 0, shape_mismatch,
                      "spatial dims " + x.shape_string() + " are not multiples of " +
                          std::to_string(m));
    Tensor4<T> h = x;
    for (std::size_t k = 0; k < encoders_.size(); ++k) {
      h = encoders_[k]->forward(h);
      h = store_skip_and_pool(k, std::move(h));
    }
    for (auto& m2 : intermediates_) h = m2->forward(h);
    for (std::size_t d = 0; d < decoders_.size(); ++d) {
      const std::size_t level = encoders_.size() - 1 - d;
      h = ups_[d]->forward(h);
      h = decoders_[d]->forward(concat_channels(h, skip_values_[level]));
    }
    h = final_->forward(h);
    return head_->forward(h);
  }

  /// Gradient of the backbone output; returns the input gradient.
  Tensor4<T> backward_backbone(const Tensor4<T>& g_out) {
    MASKBENCH_REQUIRE(!skip_values_.empty(), state, "model backward without a forward pass");
    Tensor4<T> g = final_->backward(head_->backward(g_out));
    std::vector<Tensor4<T>> skip_grads(encoders_.size());
    for (std::size_t d = decoders_.size(); d-- > 0;) {
      const std::size_t level = encoders_.size() - 1 - d;
      const Tensor4<T> gcat = decoders_[d]->backward(g);
      auto [gup, gskip] = split_channels(gcat, gcat.c() / 2);
      skip_grads[level] = std::move(gskip);
      g = ups_[d]->backward(gup);
    }
    for (auto it = intermediates_.rbegin(); it != intermediates_.rend(); ++it)
      g = (*it)->backward(g);
    for (std::size_t k = encoders_.size(); k-- > 0;) {
      g = pools_[k]->backward(g);
      add_into(g, skip_grads[k]);
      g = encoders_[k]->backward(g);
    }
    return g;
  }

  /// Full forward from an unpadded magnitude stack (N, C, T, F): per-bin
  /// input batch norm, reflect padding to multiples of 2^depth, backbone,
  /// cropping and head activations.
  HeadOutputs<T> forward(const Tensor4<T>& magnitude) {
    MASKBENCH_REQUIRE(magnitude.c() == cfg_.input_channels, shape_mismatch,
                      "model expects " + std::to_string(cfg_.input_channels) +
                          " channels, got " + magnitude.shape_string());
    MASKBENCH_REQUIRE(magnitude.w() == cfg_.freq_bins, shape_mismatch,
                      "model expects " + std::to_string(cfg_.freq_bins) +
                          " frequency bins, got " + magnitude.shape_string());
    in_dims_ = magnitude.dims();
    const Tensor4<T> normed = input_bn_.forward(magnitude);
    const Tensor4<T> padded = pad(normed);
    const Tensor4<T> raw = forward_backbone(padded);

    const std::size_t N = magnitude.n(), C = cfg_.input_channels, H = magnitude.h(),
                      W = magnitude.w();
    const std::size_t heads = heads_per_channel(cfg_.heads);
    std::vector<Tensor4<T>> outs;
    for (std::size_t k = 0; k < heads; ++k) outs.emplace_back(N, C, H, W);
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t k = 0; k < heads; ++k)
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t h = 0; h < H; ++h)
            for (std::size_t w = 0; w < W; ++w) outs[k](n, c, h, w) = raw(n, k * C + c, h, w);
    for (auto& v : outs[0].data())
      v = static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
    mask_cache_ = outs[0];
    raw_dims_ = raw.dims();

    HeadOutputs<T> result;
    result.mask_magnitude = std::move(outs[0]);
    switch (cfg_.heads) {
      case HeadMode::mask_only: break;
      case HeadMode::decouple:
        result.phase_real = std::move(outs[1]);
        result.phase_imag = std::move(outs[2]);
        break;
      case HeadMode::decouple_plus:
        result.direct = std::move(outs[1]);
        result.phase_real = std::move(outs[2]);
        result.phase_imag = std::move(outs[3]);
        break;
    }
    return result;
  }

  /// Backward from gradients with respect to the activated heads. Empty head
  /// gradients count as zero. Returns the gradient of the magnitude input.
  Tensor4<T> backward(const HeadOutputs<T>& grads) {
    MASKBENCH_REQUIRE(!mask_cache_.empty(), state, "model backward without a forward pass");
    const std::size_t N = in_dims_[0], C = cfg_.input_channels, H = in_dims_[2], W = in_dims_[3];
    Tensor4<T> graw(raw_dims_[0], raw_dims_[1], raw_dims_[2], raw_dims_[3]);
    std::vector<const Tensor4<T>*> gs;
    gs.push_back(&grads.mask_magnitude);
    switch (cfg_.heads) {
      case HeadMode::mask_only: break;
      case HeadMode::decouple:
        gs.push_back(&grads.phase_real);
        gs.push_back(&grads.phase_imag);
        break;
      case HeadMode::decouple_plus:
        gs.push_back(&grads.direct);
        gs.push_back(&grads.phase_real);
        gs.push_back(&grads.phase_imag);
        break;
    }
    for (std::size_t k = 0; k < gs.size(); ++k) {
      const Tensor4<T>& g = *gs[k];
      if (g.empty()) continue;
      MASKBENCH_REQUIRE(g.n() == N && g.c() == C && g.h() == H && g.w() == W, shape_mismatch,
                        "head gradient has shape " + g.shape_string());
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t h = 0; h < H; ++h)
            for (std::size_t w = 0; w < W; ++w) {
              T v = g(n, c, h, w);
              if (k == 0) {
                const T s = mask_cache_(n, c, h, w);
                v *= s * (T(1) - s);
              }
              graw(n, k * C + c, h, w) = v;
            }
    }
    const Tensor4<T> gpad = backward_backbone(graw);
    return input_bn_.backward(unpad_grad(gpad));
  }

 private:
  Tensor4<T> store_skip_and_pool(std::size_t k, Tensor4<T> h) {
    if (skip_values_.size() <= k) skip_values_.resize(k + 1);
    skip_values_[k] = h;
    return pools_[k]->forward(h);
  }

  static std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

  static std::size_t fold(std::size_t i, std::size_t n) {
    if (n == 1) return 0;
    const std::size_t period = 2 * (n - 1);
    std::size_t r = i % period;
    return r < n ? r : period - r;
  }

  // Reflect padding at the end of the time and frequency axes.
  Tensor4<T> pad(const Tensor4<T>& x) {
    const std::size_t m = cfg_.spatial_multiple();
    const std::size_t H = round_up(x.h(), m), W = round_up(x.w(), m);
    Tensor4<T> y(x.n(), x.c(), H, W);
    for (std::size_t n = 0; n < x.n(); ++n)
      for (std::size_t c = 0; c < x.c(); ++c)
        for (std::size_t h = 0; h < H; ++h)
          for (std::size_t w = 0; w < W; ++w)
            y(n, c, h, w) = x(n, c, fold(h, x.h()), fold(w, x.w()));
    return y;
  }

  Tensor4<T> unpad_grad(const Tensor4<T>& g) const {
    Tensor4<T> gx(in_dims_[0], in_dims_[1], in_dims_[2], in_dims_[3]);
    for (std::size_t n = 0; n < g.n(); ++n)
      for (std::size_t c = 0; c < g.c(); ++c)
        for (std::size_t h = 0; h < g.h(); ++h)
          for (std::size_t w = 0; w < g.w(); ++w)
            gx(n, c, fold(h, gx.h()), fold(w, gx.w())) += g(n, c, h, w);
    return gx;
  }

  ModelConfig cfg_;
  bool training_ = true;
  BatchNorm<T> input_bn_;
  std::vector<std::unique_ptr<Sequential<T>>> encoders_;
  std::vector<std::unique_ptr<AvgPool2<T>>> pools_;
  std::vector<std::unique_ptr<Sequential<T>>> intermediates_;
  std::vector<std::unique_ptr<ConvTranspose2d<T>>> ups_;
  std::vector<std::unique_ptr<Sequential<T>>> decoders_;
  std::unique_ptr<Sequential<T>> final_;
  std::unique_ptr<Conv2d<T>> head_;

  std::vector<Tensor4<T>> skip_values_;
  Tensor4<T> mask_cache_;
  std::array<std::size_t, 4> in_dims_{};
  std::array<std::size_t, 4> raw_dims_{};
};

/// Convolutional layers tallied from the block graph.
template <class T>
int count_conv_layers(const Model<T>& m) {
  int n = 0;
  for (const auto& b : m.describe()) n += b.conv_layers;
  return n;
}

template <class T>
std::unique_ptr<Model<T>> build_unet33(ModelConfig cfg) {
  cfg.architecture = Architecture::unet;
  return std::make_unique<Model<T>>(std::move(cfg));
}

template <class T>
std::unique_ptr<Model<T>> build_resunet143(ModelConfig cfg) {
  cfg.architecture = Architecture::resunet;
  return std::make_unique<Model<T>>(std::move(cfg));
}

/// Overwrites the output layer so the heads become constants: mask -> 1
/// (up to sigmoid saturation), direct -> 0, phase -> (1, 0). Separation then
/// returns the mixture.
template <class T>
void set_identity_heads(Model<T>& model) {
  auto& head = model.head();
  std::fill(head.weight().value.begin(), head.weight().value.end(), T(0));
  const std::size_t C = model.config().input_channels;
  auto& b = head.bias().value;
  std::fill(b.begin(), b.end(), T(0));
  for (std::size_t c = 0; c < C; ++c) b[c] = T(40);
  switch (model.config().heads) {
    case HeadMode::mask_only: break;
    case HeadMode::decouple:
      for (std::size_t c = 0; c < C; ++c) b[C + c] = T(1);
      break;
    case HeadMode::decouple_plus:
      for (std::size_t c = 0; c < C; ++c) b[2 * C + c] = T(1);
      break;
  }
}

}  // namespace maskbench::nn

#endif  // MASKBENCH_NN_MODEL_HPP
