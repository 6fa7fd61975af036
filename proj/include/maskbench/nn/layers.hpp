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

#ifndef MASKBENCH_NN_LAYERS_HPP
#define MASKBENCH_NN_LAYERS_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/nn/tensor.hpp"

namespace maskbench::nn {

/// Named parameter or buffer. Buffers (batch-norm running statistics) are
/// serialised with the weights but never receive gradients.
template <class T>
struct Parameter {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool trainable = true;

  Parameter(std::string n, std::vector<std::size_t> s, bool train = true)
      : name(std::move(n)), shape(std::move(s)), trainable(train) {
    std::size_t count = 1;
    for (auto d : shape) count *= d;
    value.assign(count, T{});
    if (trainable) grad.assign(count, T{});
  }

  std::size_t size() const noexcept { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T{}); }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-tensor generator: initialisation depends only on (seed, name), so it
/// does not shift when layers are added elsewhere in the graph.
inline std::mt19937_64 init_rng(std::uint64_t seed, std::string_view name) {
  return std::mt19937_64(splitmix64(seed ^ fnv1a(name)));
}

struct InitOptions {
  std::uint64_t seed = 0;
  double leaky_slope = 0.01;
};

template <class T>
class Module {
 public:
  virtual ~Module() = default;

  virtual Tensor4<T> forward(const Tensor4<T>& x) = 0;
  /// Accumulates parameter gradients and returns the input gradient.
  virtual Tensor4<T> backward(const Tensor4<T>& grad_out) = 0;

  virtual void collect_parameters(std::vector<Parameter<T>*>&) {}
  virtual void set_training(bool) {}
  /// While on, batch norms replace their running statistics with the
  /// cumulative average over all batches seen since the switch.
  virtual void set_calibration(bool) {}
  /// Convolutional layers as tallied for the architecture (shortcut
  /// projections are excluded).
  virtual int conv_layers() const { return 0; }

 protected:
  void require_cache(bool ok, const char* layer) const {
    if (!ok)
      throw Error(ErrorCategory::state,
                  std::string(layer) + ": backward called without a cached forward pass");
  }
};

/// 2-D convolution with square kernel (1 or 3), stride 1 and same padding.
/// Without a bias the layer has no bias parameter at all (used in front of a
/// batch norm, where a bias would be cancelled by the mean subtraction).
template <class T>
class Conv2d : public Module<T> {
 public:
  Conv2d(std::string name, std::size_t in_c, std::size_t out_c, std::size_t kernel,
         const InitOptions& init, bool counted = true, bool with_bias = true)
      : in_c_(in_c), out_c_(out_c), k_(kernel), counted_(counted), with_bias_(with_bias),
        weight_(name + ".weight", {out_c, in_c, kernel, kernel}),
        bias_(name + ".bias", {out_c}) {
    MASKBENCH_REQUIRE(in_c >= 1 && out_c >= 1, invalid_argument, "conv widths must be >= 1");
    MASKBENCH_REQUIRE(kernel == 1 || kernel == 3, invalid_argument, "conv kernel must be 1 or 3");
    auto rng = init_rng(init.seed, weight_.name);
    const double fan_in = static_cast<double>(in_c * kernel * kernel);
    const double bound =
        std::sqrt(6.0 / ((1.0 + init.leaky_slope * init.leaky_slope) * fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& v : weight_.value) v = static_cast<T>(u(rng));
  }

  Tensor4<T> forward(const Tensor4<T>& x) override {
    MASKBENCH_REQUIRE(x.c() == in_c_, shape_mismatch,
                      weight_.name + ": expected " + std::to_string(in_c_) +
                          " input channels, got " + x.shape_string());
    input_ = x;
    cached_ = true;
    const std::size_t H = x.h(), W = x.w();
    const long p = static_cast<long>(k_ / 2);
    Tensor4<T> y(x.n(), out_c_, H, W);
    for (std::size_t n = 0; n < x.n(); ++n) {
      for (std::size_t co = 0; co < out_c_; ++co) {
        T* out = y.plane_ptr(n, co);
        std::fill_n(out, H * W, bias_.value[co]);
        for (std::size_t ci = 0; ci < in_c_; ++ci) {
          const T* in = x.plane_ptr(n, ci);
          const T* wk = &weight_.value[(co * in_c_ + ci) * k_ * k_];
          for (std::size_t kh = 0; kh < k_; ++kh) {
            const long dh = static_cast<long>(kh) - p;
            for (std::size_t kw = 0; kw < k_; ++kw) {
              const long dw = static_cast<long>(kw) - p;
              const T wv = wk[kh * k_ + kw];
              const std::size_t w0 = dw < 0 ? static_cast<std::size_t>(-dw) : 0;
              const std::size_t w1 = dw > 0 ? W - static_cast<std::size_t>(dw) : W;
              for (std::size_t h = 0; h < H; ++h) {
                const long sh = static_cast<long>(h) + dh;
                if (sh < 0 || sh >= static_cast<long>(H)) continue;
                const T* src = in + static_cast<std::size_t>(sh) * W;
                T* dst = out + h * W;
                for (std::size_t w = w0; w < w1; ++w) dst[w] += wv * src[static_cast<long>(w) + dw];
              }
            }
          }
        }
      }
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& gy) override {
    this->require_cache(cached_, weight_.name.c_str());
    const Tensor4<T>& x = input_;
    const std::size_t H = x.h(), W = x.w();
    const long p = static_cast<long>(k_ / 2);
    Tensor4<T> gx(x.n(), in_c_, H, W);
    for (std::size_t n = 0; n < x.n(); ++n) {
      for (std::size_t co = 0; co < out_c_; ++co) {
        const T* g = gy.plane_ptr(n, co);
        if (with_bias_) {
          T acc{};
          for (std::size_t i = 0; i < H * W; ++i) acc += g[i];
          bias_.grad[co] += acc;
        }
        for (std::size_t ci = 0; ci < in_c_; ++ci) {
          const T* in = x.plane_ptr(n, ci);
          T* gin = gx.plane_ptr(n, ci);
          const std::size_t base = (co * in_c_ + ci) * k_ * k_;
          for (std::size_t kh = 0; kh < k_; ++kh) {
            const long dh = static_cast<long>(kh) - p;
            for (std::size_t kw = 0; kw < k_; ++kw) {
              const long dw = static_cast<long>(kw) - p;
              const T wv = weight_.value[base + kh * k_ + kw];
              const std::size_t w0 = dw < 0 ? static_cast<std::size_t>(-dw) : 0;
              const std::size_t w1 = dw > 0 ? W - static_cast<std::size_t>(dw) : W;
              T gw{};
              for (std::size_t h = 0; h < H; ++h) {
                const long sh = static_cast<long>(h) + dh;
                if (sh < 0 || sh >= static_cast<long>(H)) continue;
                const T* src = in + static_cast<std::size_t>(sh) * W;
                T* gsrc = gin + static_cast<std::size_t>(sh) * W;
                const T* grow = g + h * W;
                for (std::size_t w = w0; w < w1; ++w) {
                  const long sw = static_cast<long>(w) + dw;
                  gw += grow[w] * src[sw];
                  gsrc[sw] += wv * grow[w];
                }
              }
              weight_.grad[base + kh * k_ + kw] += gw;
            }
          }
        }
      }
    }
    return gx;
  }

  void collect_parameters(std::vector<Parameter<T>*>& out) override {
    out.push_back(&weight_);
    if (with_bias_) out.push_back(&bias_);
  }
  int conv_layers() const override { return counted_ ? 1 : 0; }
  bool has_bias() const { return with_bias_; }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }
  std::size_t kernel() const { return k_; }

 private:
  std::size_t in_c_, out_c_, k_;
  bool counted_;
  bool with_bias_;
  Parameter<T> weight_, bias_;
  Tensor4<T> input_;
  bool cached_ = false;
};

/// 3x3 transposed convolution with stride 2, padding 1 and output padding 1,
/// so (H, W) maps to (2H, 2W). Weight layout is (in, out, 3, 3).
template <class T>
class ConvTranspose2d : public Module<T> {
 public:
  ConvTranspose2d(std::string name, std::size_t in_c, std::size_t out_c, const InitOptions& init)
      : in_c_(in_c), out_c_(out_c), weight_(name + ".weight", {in_c, out_c, 3, 3}),
        bias_(name + ".bias", {out_c}) {
    MASKBENCH_REQUIRE(in_c >= 1 && out_c >= 1, invalid_argument,
                      "transposed conv widths must be >= 1");
    auto rng = init_rng(init.seed, weight_.name);
    // Each output pixel receives about in_c * 9 / 4 contributions.
    const double fan_in = static_cast<double>(in_c) * 9.0 / 4.0;
    const double bound =
        std::sqrt(6.0 / ((1.0 + init.leaky_slope * init.leaky_slope) * fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& v : weight_.value) v = static_cast<T>(u(rng));
  }

  Tensor4<T> forward(const Tensor4<T>& x) override {
    MASKBENCH_REQUIRE(x.c() == in_c_, shape_mismatch,
                      weight_.name + ": expected " + std::to_string(in_c_) +
                          " input channels, got " + x.shape_string());
    input_ = x;
    cached_ = true;
    const std::size_t H = x.h(), W = x.w(), OH = 2 * H, OW = 2 * W;
    Tensor4<T> y(x.n(), out_c_, OH, OW);
    for (std::size_t n = 0; n < x.n(); ++n) {
      for (std::size_t co = 0; co < out_c_; ++co) {
        T* out = y.plane_ptr(n, co);
        std::fill_n(out, OH * OW, bias_.value[co]);
        for (std::size_t ci = 0; ci < in_c_; ++ci) {
          const T* in = x.plane_ptr(n, ci);
          const T* wk = &weight_.value[(ci * out_c_ + co) * 9];
          for (std::size_t kh = 0; kh < 3; ++kh)
            for (std::size_t kw = 0; kw < 3; ++kw) {
              const T wv = wk[kh * 3 + kw];
              for (std::size_t h = 0; h < H; ++h) {
                const long oh = 2 * static_cast<long>(h) + static_cast<long>(kh) - 1;
                if (oh < 0 || oh >= static_cast<long>(OH)) continue;
                T* dst = out + static_cast<std::size_t>(oh) * OW;
                const T* src = in + h * W;
                for (std::size_t w = 0; w < W; ++w) {
                  const long ow = 2 * static_cast<long>(w) + static_cast<long>(kw) - 1;
                  if (ow < 0) continue;
                  dst[ow] += wv * src[w];
                }
              }
            }
        }
      }
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& gy) override {
    this->require_cache(cached_, weight_.name.c_str());
    const Tensor4<T>& x = input_;
    const std::size_t H = x.h(), W = x.w(), OH = 2 * H, OW = 2 * W;
    Tensor4<T> gx(x.n(), in_c_, H, W);
    for (std::size_t n = 0; n < x.n(); ++n) {
      for (std::size_t co = 0; co < out_c_; ++co) {
        const T* g = gy.plane_ptr(n, co);
        T acc{};
        for (std::size_t i = 0; i < OH * OW; ++i) acc += g[i];
        bias_.grad[co] += acc;
        for (std::size_t ci = 0; ci < in_c_; ++ci) {
          const T* in = x.plane_ptr(n, ci);
          T* gin = gx.plane_ptr(n, ci);
          const std::size_t base = (ci * out_c_ + co) * 9;
          for (std::size_t kh = 0; kh < 3; ++kh)
            for (std::size_t kw = 0; kw < 3; ++kw) {
              const T wv = weight_.value[base + kh * 3 + kw];
              T gw{};
              for (std::size_t h = 0; h < H; ++h) {
                const long oh = 2 * static_cast<long>(h) + static_cast<long>(kh) - 1;
                if (oh < 0 || oh >= static_cast<long>(OH)) continue;
                const T* grow = g + static_cast<std::size_t>(oh) * OW;
                for (std::size_t w = 0; w < W; ++w) {
                  const long ow = 2 * static_cast<long>(w) + static_cast<long>(kw) - 1;
                  if (ow < 0) continue;
                  gw += grow[ow] * in[h * W + w];
                  gin[h * W + w] += wv * grow[ow];
                }
              }
              weight_.grad[base + kh * 3 + kw] += gw;
            }
        }
      }
    }
    return gx;
  }

  void collect_parameters(std::vector<Parameter<T>*>& out) override {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }
  int conv_layers() const override { return 1; }
  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

 private:
  std::size_t in_c_, out_c_;
  Parameter<T> weight_, bias_;
  Tensor4<T> input_;
  bool cached_ = false;
};

/// Batch normalisation over one feature axis: axis 1 normalises each channel
/// over (batch, time, freq); axis 3 normalises each frequency bin over
/// (batch, channel, time).
template <class T>
class BatchNorm : public Module<T> {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.9;

  BatchNorm(std::string name, std::size_t features, int axis)
      : features_(features), axis_(axis), gamma_(name + ".weight", {features}),
        beta_(name + ".bias", {features}),
        running_mean_(name + ".running_mean", {features}, false),
        running_var_(name + ".running_var", {features}, false) {
    MASKBENCH_REQUIRE(axis == 1 || axis == 3, invalid_argument, "batch norm axis must be 1 or 3");
    std::fill(gamma_.value.begin(), gamma_.value.end(), T(1));
    std::fill(running_var_.value.begin(), running_var_.value.end(), T(1));
  }

  Tensor4<T> forward(const Tensor4<T>& x) override {
    const std::size_t feat = axis_ == 1 ? x.c() : x.w();
    MASKBENCH_REQUIRE(feat == features_, shape_mismatch,
                      gamma_.name + ": expected " + std::to_string(features_) +
                          " features, got " + x.shape_string());
    const std::size_t count = x.size() / features_;
    std::vector<double> mean(features_, 0.0), var(features_, 0.0);
    if (training_) {
      for (std::size_t i = 0; i < x.size(); ++i) mean[feature_of(x, i)] += x[i];
      for (auto& m : mean) m /= static_cast<double>(count);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - mean[feature_of(x, i)];
        var[feature_of(x, i)] += d * d;
      }
      for (std::size_t f = 0; f < features_; ++f) {
        const double biased = var[f] / static_cast<double>(count);
        const double unbiased = count > 1 ? var[f] / static_cast<double>(count - 1) : biased;
        var[f] = biased;
        const double keep =
            calibrating_ ? static_cast<double>(calib_batches_) / (calib_batches_ + 1.0) : kMomentum;
        running_mean_.value[f] =
            static_cast<T>(keep * running_mean_.value[f] + (1.0 - keep) * mean[f]);
        running_var_.value[f] =
            static_cast<T>(keep * running_var_.value[f] + (1.0 - keep) * unbiased);
      }
      if (calibrating_) ++calib_batches_;
    } else {
      for (std::size_t f = 0; f < features_; ++f) {
        mean[f] = running_mean_.value[f];
        var[f] = running_var_.value[f];
      }
    }
    inv_std_.assign(features_, 0.0);
    for (std::size_t f = 0; f < features_; ++f) inv_std_[f] = 1.0 / std::sqrt(var[f] + kEps);
    normalized_ = Tensor4<T>(x.n(), x.c(), x.h(), x.w());
    Tensor4<T> y(x.n(), x.c(), x.h(), x.w());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::size_t f = feature_of(x, i);
      const double xh = (x[i] - mean[f]) * inv_std_[f];
      normalized_[i] = static_cast<T>(xh);
      y[i] = static_cast<T>(gamma_.value[f] * xh + beta_.value[f]);
    }
    cached_training_ = training_;
    cached_ = true;
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& gy) override {
    this->require_cache(cached_, gamma_.name.c_str());
    const Tensor4<T>& xh = normalized_;
    const std::size_t count = xh.size() / features_;
    std::vector<double> sum_g(features_, 0.0), sum_gx(features_, 0.0);
    for (std::size_t i = 0; i < xh.size(); ++i) {
      const std::size_t f = feature_of(xh, i);
      sum_g[f] += gy[i];
      sum_gx[f] += static_cast<double>(gy[i]) * xh[i];
    }
    for (std::size_t f = 0; f < features_; ++f) {
      gamma_.grad[f] += static_cast<T>(sum_gx[f]);
      beta_.grad[f] += static_cast<T>(sum_g[f]);
    }
    Tensor4<T> gx(xh.n(), xh.c(), xh.h(), xh.w());
    const double inv_n = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < xh.size(); ++i) {
      const std::size_t f = feature_of(xh, i);
      const double g = gamma_.value[f] * inv_std_[f];
      if (cached_training_) {
        // d/dx of (x - mean) / std with batch statistics
        gx[i] = static_cast<T>(g * (gy[i] - inv_n * sum_g[f] - xh[i] * inv_n * sum_gx[f]));
      } else {
        gx[i] = static_cast<T>(g * gy[i]);
      }
    }
    return gx;
  }

  void collect_parameters(std::vector<Parameter<T>*>& out) override {
    out.push_back(&gamma_);
    out.push_back(&beta_);
    out.push_back(&running_mean_);
    out.push_back(&running_var_);
  }
  void set_training(bool t) override { training_ = t; }
  void set_calibration(bool on) override {
    calibrating_ = on;
    calib_batches_ = 0;
  }

 private:
  std::size_t feature_of(const Tensor4<T>& x, std::size_t i) const {
    return axis_ == 1 ? (i / x.plane()) % x.c() : i % x.w();
  }

  std::size_t features_;
  int axis_;
  Parameter<T> gamma_, beta_, running_mean_, running_var_;
  bool training_ = true;
  bool calibrating_ = false;
  std::size_t calib_batches_ = 0;
  bool cached_training_ = true;
  bool cached_ = false;
  std::vector<double> inv_std_;
  Tensor4<T> normalized_;
};

template <class T>
class LeakyRelu : public Module<T> {
 public:
  explicit LeakyRelu(double slope = 0.01) : slope_(static_cast<T>(slope)) {}

  Tensor4<T> forward(const Tensor4<T>& x) override {
    input_ = x;
    cached_ = true;
    Tensor4<T> y = x;
    for (auto& v : y.data())
      if (v < T(0)) v *= slope_;
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& gy) override {
    this->require_cache(cached_, "leaky_relu");
    Tensor4<T> gx = gy;
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (input_[i] < T(0)) gx[i] *= slope_;
    return gx;
  }

  T slope() const { return slope_; }

 private:
  T slope_;
  Tensor4<T> input_;
  bool cached_ = false;
};

/// 2x2 average pooling with stride 2; H and W must be even.
template <class T>
class AvgPool2 : public Module<T> {
 public:
  Tensor4<T> forward(const Tensor4<T>& x) override {
    MASKBENCH_REQUIRE(x.h() % 2 == 0 && x.w() % 2 == 0, shape_mismatch,
                      "avg_pool2x2 needs even spatial dims, got " + x.shape_string());
    in_dims_ = x.dims();
    cached_ = true;
    Tensor4<T> y(x.n(), x.c(), x.h() / 2, x.w() / 2);
    for (std::size_t n = 0; n < x.n(); ++n)
      for (std::size_t c = 0; c < x.c(); ++c)
        for (std::size_t h = 0; h < y.h(); ++h)
          for (std::size_t w = 0; w < y.w(); ++w)
            y(n, c, h, w) = T(0.25) * (x(n, c, 2 * h, 2 * w) + x(n, c, 2 * h, 2 * w + 1) +
                                       x(n, c, 2 * h + 1, 2 * w) + x(n, c, 2 * h + 1, 2 * w + 1));
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& gy) override {
    this->require_cache(cached_, "avg_pool2x2");
    Tensor4<T> gx(in_dims_[0], in_dims_[1], in_dims_[2], in_dims_[3]);
    for (std::size_t n = 0; n < gy.n(); ++n)
      for (std::size_t c = 0; c < gy.c(); ++c)
        for (std::size_t h = 0; h < gy.h(); ++h)
          for (std::size_t w = 0; w < gy.w(); ++w) {
            const T g = T(0.25) * gy(n, c, h, w);
            gx(n, c, 2 * h, 2 * w) = g;
            gx(n, c, 2 * h, 2 * w + 1) = g;
            gx(n, c, 2 * h + 1, 2 * w) = g;
            gx(n, c, 2 * h + 1, 2 * w + 1) = g;
          }
    return gx;
  }

 private:
  std::array<std::size_t, 4> in_dims_{};
  bool cached_ = false;
};

/// Runs child modules in order.
template <class T>
class Sequential : public Module<T> {
 public:
  template <class M, class... Args>
  M& add(Args&&... args) {
    auto m = std::make_unique<M>(std::forward<Args>(args)...);
    M& ref = *m;
    layers_.push_back(std::move(m));
    return ref;
  }

  Tensor4<T> forward(const Tensor4<T>& x) override {
    Tensor4<T> y = x;
    for (auto& l : layers_) y = l->forward(y);
    return y;
  }
  Tensor4<T> backward(const Tensor4<T>& gy) override {
    Tensor4<T> g = gy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }
  void collect_parameters(std::vector<Parameter<T>*>& out) override {
    for (auto& l : layers_) l->collect_parameters(out);
  }
  void set_training(bool t) override {
    for (auto& l : layers_) l->set_training(t);
  }
  void set_calibration(bool on) override {
    for (auto& l : layers_) l->set_calibration(on);
  }
  int conv_layers() const override {
    int n = 0;
    for (const auto& l : layers_) n += l->conv_layers();
    return n;
  }
  std::size_t size() const { return layers_.size(); }
  Module<T>& operator[](std::size_t i) { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Module<T>>> layers_;
};

}  // namespace maskbench::nn

#endif  // MASKBENCH_NN_LAYERS_HPP
