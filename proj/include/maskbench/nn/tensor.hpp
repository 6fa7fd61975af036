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

#ifndef MASKBENCH_NN_TENSOR_HPP
#define MASKBENCH_NN_TENSOR_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "maskbench/error.hpp"

namespace maskbench::nn {

/// Dense NCHW tensor; H is the time axis and W the frequency axis.
template <class T>
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, T fill = T{})
      : dims_{n, c, h, w}, data_(n * c * h * w, fill) {
    MASKBENCH_REQUIRE(n >= 1 && c >= 1 && h >= 1 && w >= 1, invalid_argument,
                      "tensor dimensions must be at least 1");
  }

  std::size_t n() const noexcept { return dims_[0]; }
  std::size_t c() const noexcept { return dims_[1]; }
  std::size_t h() const noexcept { return dims_[2]; }
  std::size_t w() const noexcept { return dims_[3]; }
  const std::array<std::size_t, 4>& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t plane() const noexcept { return dims_[2] * dims_[3]; }

  T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * dims_[1] + c) * dims_[2] + h) * dims_[3] + w];
  }
  const T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * dims_[1] + c) * dims_[2] + h) * dims_[3] + w];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T* plane_ptr(std::size_t n, std::size_t c) { return data_.data() + (n * dims_[1] + c) * plane(); }
  const T* plane_ptr(std::size_t n, std::size_t c) const {
    return data_.data() + (n * dims_[1] + c) * plane();
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(const Tensor4& o) const noexcept { return dims_ == o.dims_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  std::string shape_string() const {
    return "(" + std::to_string(dims_[0]) + ", " + std::to_string(dims_[1]) + ", " +
           std::to_string(dims_[2]) + ", " + std::to_string(dims_[3]) + ")";
  }

 private:
  std::array<std::size_t, 4> dims_{0, 0, 0, 0};
  std::vector<T> data_;
};

/// Concatenates along the channel axis.
template <class T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b) {
  MASKBENCH_REQUIRE(a.n() == b.n() && a.h() == b.h() && a.w() == b.w(), shape_mismatch,
                    "concat: " + a.shape_string() + " vs " + b.shape_string());
  Tensor4<T> out(a.n(), a.c() + b.c(), a.h(), a.w());
  for (std::size_t n = 0; n < a.n(); ++n) {
    std::copy_n(a.plane_ptr(n, 0), a.c() * a.plane(), out.plane_ptr(n, 0));
    std::copy_n(b.plane_ptr(n, 0), b.c() * b.plane(), out.plane_ptr(n, a.c()));
  }
  return out;
}

/// Splits the channel axis at `first` channels; inverse of concat_channels.
template <class T>
std::pair<Tensor4<T>, Tensor4<T>> split_channels(const Tensor4<T>& x, std::size_t first) {
  Tensor4<T> a(x.n(), first, x.h(), x.w());
  Tensor4<T> b(x.n(), x.c() - first, x.h(), x.w());
  for (std::size_t n = 0; n < x.n(); ++n) {
    std::copy_n(x.plane_ptr(n, 0), first * x.plane(), a.plane_ptr(n, 0));
    std::copy_n(x.plane_ptr(n, first), (x.c() - first) * x.plane(), b.plane_ptr(n, 0));
  }
  return {std::move(a), std::move(b)};
}

template <class T>
void add_into(Tensor4<T>& dst, const Tensor4<T>& src) {
  MASKBENCH_REQUIRE(dst.same_shape(src), shape_mismatch,
                    "add: " + dst.shape_string() + " vs " + src.shape_string());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace maskbench::nn

#endif  // MASKBENCH_NN_TENSOR_HPP
