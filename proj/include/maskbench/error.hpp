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

#ifndef MASKBENCH_ERROR_HPP
#define MASKBENCH_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace maskbench {

/// Coarse failure classes. The CLI prints the category name as the first
/// token of its single-line diagnostic so scripts can branch on it.
enum class ErrorCategory {
  invalid_argument,
  shape_mismatch,
  io,
  format,
  numeric,
  state,
};

constexpr std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::invalid_argument: return "invalid_argument";
    case ErrorCategory::shape_mismatch: return "shape_mismatch";
    case ErrorCategory::io: return "io";
    case ErrorCategory::format: return "format";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::state: return "state";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define MASKBENCH_REQUIRE(cond, category, msg)                          \
  do {                                                                  \
    if (!(cond)) throw ::maskbench::Error(::maskbench::ErrorCategory::category, (msg)); \
  } while (0)

}  // namespace maskbench

#endif  // MASKBENCH_ERROR_HPP
