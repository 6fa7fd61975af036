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

#ifndef MASKBENCH_NN_GRAD_CHECK_HPP
#define MASKBENCH_NN_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "maskbench/nn/layers.hpp"
#include "maskbench/nn/model.hpp"
#include "maskbench/nn/tensor.hpp"

namespace maskbench::nn {

struct GradCheckOptions {
  double step = 1e-5;
  /// Inputs closer to zero than this are pushed out to it so that no
  /// difference straddles the leaky-relu kink at the input layer.
  double kink_margin = 1e-3;
  /// Denominator floor of the relative error.
  double floor = 1e-6;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<tensor>[index]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline void nudge_from_zero(std::vector<double>& v, double margin) {
  for (auto& x : v)
    if (std::abs(x) < margin) x = x < 0.0 ? -margin : margin;
}

namespace detail {

inline void record(GradCheckResult& r, double analytic, double numeric, double floor,
                   const std::string& name, std::size_t i) {
  const double e = relative_error(analytic, numeric, floor);
  ++r.checked;
  if (r.worst.empty() || e > r.max_rel_error) {
    r.max_rel_error = e;
    r.worst = name + "[" + std::to_string(i) + "]";
    r.worst_analytic = analytic;
    r.worst_numeric = numeric;
  }
}

// Compares analytic gradients of a scalar loss(x) against central differences
// for x and every trainable parameter. `run` evaluates the loss; `run_grad`
// evaluates it, back-propagates and returns the input gradient.
inline GradCheckResult compare(Tensor4<double>& x, const std::vector<Parameter<double>*>& params,
                               const std::function<double()>& run,
                               const std::function<Tensor4<double>()>& run_grad,
                               const GradCheckOptions& opt) {
  for (auto* p : params) p->zero_grad();
  const Tensor4<double> gx = run_grad();
  GradCheckResult r;
  auto diff = [&](double& slot) {
    const double saved = slot;
    slot = saved + opt.step;
    const double up = run();
    slot = saved - opt.step;
    const double down = run();
    slot = saved;
    return (up - down) / (2.0 * opt.step);
  };
  for (std::size_t i = 0; i < x.size(); ++i)
    record(r, gx[i], diff(x[i]), opt.floor, "input", i);
  for (auto* p : params) {
    if (!p->trainable) continue;
    for (std::size_t i = 0; i < p->size(); ++i)
      record(r, p->grad[i], diff(p->value[i]), opt.floor, p->name, i);
  }
  return r;
}

inline Tensor4<double> random_like(const std::array<std::size_t, 4>& d, std::mt19937_64& rng) {
  Tensor4<double> t(d[0], d[1], d[2], d[3]);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& v : t.data()) v = g(rng);
  return t;
}

inline double dot(const Tensor4<double>& a, const Tensor4<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// Finite-difference check of one module under the loss sum(probe * y).
inline GradCheckResult grad_check(Module<double>& m, Tensor4<double> x,
                                  const GradCheckOptions& opt = {}) {
  nudge_from_zero(x.data(), opt.kink_margin);
  std::mt19937_64 rng(opt.seed);
  const Tensor4<double> probe = detail::random_like(m.forward(x).dims(), rng);
  std::vector<Parameter<double>*> params;
  m.collect_parameters(params);
  auto run = [&] { return detail::dot(m.forward(x), probe); };
  auto run_grad = [&] {
    m.forward(x);
    return m.backward(probe);
  };
  return detail::compare(x, params, run, run_grad, opt);
}

/// Finite-difference check of a whole model (input batch norm, padding,
/// backbone and head activations) under the loss sum_k(probe_k * head_k).
/// Intended for tiny models: every parameter is perturbed.
inline GradCheckResult grad_check(Model<double>& model, Tensor4<double> x,
                                  const GradCheckOptions& opt = {}) {
  nudge_from_zero(x.data(), opt.kink_margin);
  std::mt19937_64 rng(opt.seed);
  const HeadOutputs<double> first = model.forward(x);
  HeadOutputs<double> probe;
  const auto& d = first.mask_magnitude.dims();
  probe.mask_magnitude = detail::random_like(d, rng);
  if (!first.direct.empty()) probe.direct = detail::random_like(d, rng);
  if (!first.phase_real.empty()) probe.phase_real = detail::random_like(d, rng);
  if (!first.phase_imag.empty()) probe.phase_imag = detail::random_like(d, rng);
  auto loss = [&](const HeadOutputs<double>& h) {
    double s = detail::dot(h.mask_magnitude, probe.mask_magnitude);
    if (!h.direct.empty()) s += detail::dot(h.direct, probe.direct);
    if (!h.phase_real.empty()) s += detail::dot(h.phase_real, probe.phase_real);
    if (!h.phase_imag.empty()) s += detail::dot(h.phase_imag, probe.phase_imag);
    return s;
  };
  auto run = [&] { return loss(model.forward(x)); };
  auto run_grad = [&] {
    model.forward(x);
    return model.backward(probe);
  };
  return detail::compare(x, model.parameters(), run, run_grad, opt);
}

}  // namespace maskbench::nn

#endif  // MASKBENCH_NN_GRAD_CHECK_HPP
