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

#ifndef MASKBENCH_BENCHMARK_HPP
#define MASKBENCH_BENCHMARK_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/masks.hpp"
#include "maskbench/sdr.hpp"
#include "maskbench/signal.hpp"
#include "maskbench/stft.hpp"

namespace maskbench::bss {

/// One oracle mask family with its magnitude limit. Text form:
/// `mixture`, `ibm`, `irm:<L>`, `cirm:<L>` with L a positive number or `inf`.
struct MaskVariant {
  enum class Kind { mixture, ibm, irm, cirm };

  Kind kind = Kind::mixture;
  double limit = masks::kUnbounded;

  static MaskVariant mixture() { return {Kind::mixture, masks::kUnbounded}; }
  static MaskVariant ibm() { return {Kind::ibm, 1.0}; }
  static MaskVariant irm(double l) { return {Kind::irm, l}; }
  static MaskVariant cirm(double l) { return {Kind::cirm, l}; }

  static MaskVariant parse(const std::string& text) {
    if (text == "mixture") return mixture();
    if (text == "ibm") return ibm();
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if ((head == "irm" || head == "cirm") && colon != std::string::npos) {
      const std::string arg = text.substr(colon + 1);
      double l = 0.0;
      if (arg == "inf") {
        l = masks::kUnbounded;
      } else {
        std::size_t used = 0;
        try {
          l = std::stod(arg, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        MASKBENCH_REQUIRE(used == arg.size() && used > 0 && l > 0.0 && std::isfinite(l),
                          invalid_argument, "bad mask limit in variant '" + text + "'");
      }
      return head == "irm" ? irm(l) : cirm(l);
    }
    throw Error(ErrorCategory::invalid_argument, "unknown mask variant '" + text + "'");
  }

  static std::string format_limit(double l) {
    if (!std::isfinite(l)) return "inf";
    std::ostringstream os;
    os << l;
    return os.str();
  }

  std::string token() const {
    switch (kind) {
      case Kind::mixture: return "mixture";
      case Kind::ibm: return "ibm";
      case Kind::irm: return "irm:" + format_limit(limit);
      case Kind::cirm: return "cirm:" + format_limit(limit);
    }
    return {};
  }

  /// Column heading in the text table, e.g. `cIRM (inf)`.
  std::string label() const {
    switch (kind) {
      case Kind::mixture: return "Mixture";
      case Kind::ibm: return "IBM";
      case Kind::irm: return "IRM (" + format_limit(limit) + ")";
      case Kind::cirm: return "cIRM (" + format_limit(limit) + ")";
    }
    return {};
  }

  friend bool operator==(const MaskVariant&, const MaskVariant&) = default;
};

/// The nine columns of the classic upper-bound table plus IRM(inf).
inline std::vector<MaskVariant> standard_variants() {
  return {MaskVariant::mixture(), MaskVariant::ibm(),      MaskVariant::irm(1.0),
          MaskVariant::irm(masks::kUnbounded), MaskVariant::cirm(1.0), MaskVariant::cirm(2.0),
          MaskVariant::cirm(5.0),  MaskVariant::cirm(10.0), MaskVariant::cirm(masks::kUnbounded)};
}

inline std::vector<MaskVariant> parse_variant_list(const std::string& csv) {
  std::vector<MaskVariant> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(MaskVariant::parse(item));
  }
  MASKBENCH_REQUIRE(!out.empty(), invalid_argument, "empty mask variant list");
  return out;
}

enum class Aggregation { global, windowed_median };

struct SdrReport {
  struct Cell {
    std::string source;
    MaskVariant variant;
    double sdr_db;
  };

  Aggregation aggregation = Aggregation::global;
  std::vector<std::string> sources;
  std::vector<MaskVariant> variants;
  std::vector<Cell> cells;  // source-major, variants in request order

  std::optional<double> find(const std::string& source, const MaskVariant& v) const {
    for (const auto& c : cells)
      if (c.source == source && c.variant == v) return c.sdr_db;
    return std::nullopt;
  }

  double at(const std::string& source, const MaskVariant& v) const {
    auto r = find(source, v);
    MASKBENCH_REQUIRE(r.has_value(), invalid_argument,
                      "no SDR for " + source + " / " + v.token());
    return *r;
  }
};

struct BenchmarkOptions {
  dsp::StftConfig stft{};
  double mask_eps = masks::kDefaultCirmEps;
  double sdr_eps = kDefaultSdrEps;
  Aggregation aggregation = Aggregation::global;
  double window_s = 1.0;
};

/// |X| scaled by a magnitude mask.
inline RealGrid scaled_magnitude(const RealGrid& mask, const ComplexGrid& mix) {
  RealGrid out(mix.channels(), mix.frames(), mix.bins());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] * std::abs(mix[i]);
  return out;
}

/// Separates a target from its mixture with one oracle mask variant and
/// returns the time-domain estimate.
inline Waveform oracle_separate(const ComplexSpectrogram& target, const ComplexSpectrogram& mix,
                                const Waveform& mixture_wave, const MaskVariant& v,
                                const BenchmarkOptions& opt) {
  if (v.kind == MaskVariant::Kind::mixture) return mixture_wave;
  ComplexSpectrogram est;
  switch (v.kind) {
    case MaskVariant::Kind::ibm:
      est = masks::apply_magnitude_with_mixture_phase(
          scaled_magnitude(masks::ideal_binary_mask(target, mix), mix), mix);
      break;
    case MaskVariant::Kind::irm: {
      const auto m = masks::ideal_ratio_mask(target, mix, v.limit, opt.mask_eps);
      est = masks::apply_magnitude_with_mixture_phase(scaled_magnitude(m, mix), mix);
      break;
    }
    case MaskVariant::Kind::cirm:
      est = masks::apply_complex_mask(
          masks::clip_mask_magnitude(masks::compute_cirm(target, mix, opt.mask_eps), v.limit), mix);
      break;
    case MaskVariant::Kind::mixture:
      break;
  }
  return dsp::istft(est, opt.stft, mixture_wave.samples(), mixture_wave.sample_rate());
}

inline double score(const Waveform& reference, const Waveform& estimate,
                    const BenchmarkOptions& opt) {
  return opt.aggregation == Aggregation::global
             ? sdr(reference, estimate, opt.sdr_eps)
             : windowed_median_sdr(reference, estimate, opt.window_s, opt.sdr_eps);
}

/// As oracle_benchmark() but with an explicit mixture, for single-target
/// evaluation where the stems do not sum to the mixture.
inline SdrReport oracle_benchmark_with_mixture(
    const Waveform& mixture, const std::vector<std::pair<std::string, Waveform>>& targets,
    const std::vector<MaskVariant>& variants, const BenchmarkOptions& opt = {}) {
  const auto mix = dsp::stft(mixture, opt.stft);
  SdrReport report;
  report.aggregation = opt.aggregation;
  report.variants = variants;
  for (const auto& [name, stem] : targets) {
    MASKBENCH_REQUIRE(stem.same_shape(mixture), shape_mismatch,
                      "target '" + name + "' differs from the mixture in shape");
    report.sources.push_back(name);
    const auto target = dsp::stft(stem, opt.stft);
    for (const auto& v : variants) {
      const auto est = oracle_separate(target, mix, mixture, v, opt);
      report.cells.push_back({name, v, score(stem, est, opt)});
    }
  }
  return report;
}

/// Oracle upper-bound benchmark: mixes the stems, then for every source and
/// variant separates with the ideal mask of that family and scores the
/// estimate against the stem. The `mixture` variant scores the unprocessed
/// mixture.
inline SdrReport oracle_benchmark(const std::vector<std::pair<std::string, Waveform>>& stems,
                                  const std::vector<MaskVariant>& variants,
                                  const BenchmarkOptions& opt = {}) {
  MASKBENCH_REQUIRE(stems.size() >= 2, invalid_argument,
                    "oracle benchmark needs at least two sources");
  MASKBENCH_REQUIRE(!variants.empty(), invalid_argument, "no mask variants requested");
  const Waveform& first = stems.front().second;
  Waveform mixture(first.channels(), first.samples(), first.sample_rate());
  for (const auto& [name, w] : stems) {
    MASKBENCH_REQUIRE(w.same_shape(first), shape_mismatch,
                      "stem '" + name + "' differs in length or channel count");
    MASKBENCH_REQUIRE(w.sample_rate() == first.sample_rate(), invalid_argument,
                      "stem '" + name + "' has a different sample rate");
    for (std::size_t i = 0; i < w.data().size(); ++i) mixture.data()[i] += w.data()[i];
  }
  return oracle_benchmark_with_mixture(mixture, stems, variants, opt);
}

/// `source,variant,sdr_db` rows, values capped at kSdrCapDb.
inline std::string report_csv(const SdrReport& r) {
  std::ostringstream os;
  os << "source,variant,sdr_db\n";
  char buf[64];
  for (const auto& c : r.cells) {
    std::snprintf(buf, sizeof buf, "%.4f", cap_sdr(c.sdr_db));
    os << c.source << ',' << c.variant.token() << ',' << buf << '\n';
  }
  return os.str();
}

/// Aligned text table, one row per source and one column per variant.
inline std::string report_table(const SdrReport& r) {
  std::vector<std::string> head{""};
  for (const auto& v : r.variants) head.push_back(v.label());
  std::vector<std::vector<std::string>> rows{head};
  char buf[64];
  for (const auto& s : r.sources) {
    std::vector<std::string> row{s};
    for (const auto& v : r.variants) {
      const auto val = r.find(s, v);
      if (val) {
        std::snprintf(buf, sizeof buf, "%.2f", cap_sdr(*val));
        row.emplace_back(buf);
      } else {
        row.emplace_back("-");
      }
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0) {
        os << row[i] << std::string(width[i] - row[i].size(), ' ');
      } else {
        os << "  " << std::string(width[i] - row[i].size(), ' ') << row[i];
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace maskbench::bss

#endif  // MASKBENCH_BENCHMARK_HPP
