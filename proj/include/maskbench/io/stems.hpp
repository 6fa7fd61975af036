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

#ifndef MASKBENCH_IO_STEMS_HPP
#define MASKBENCH_IO_STEMS_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/io/wav.hpp"
#include "maskbench/signal.hpp"

namespace maskbench::io {

/// Named source stems of one song, in load order.
using StemSet = std::vector<std::pair<std::string, Waveform>>;

inline const std::vector<std::string>& standard_sources() {
  static const std::vector<std::string> s{"vocals", "accompaniment", "bass", "drums", "other"};
  return s;
}

/// All stems must share sample rate, channel count and length.
inline void validate_stems(const StemSet& stems) {
  MASKBENCH_REQUIRE(!stems.empty(), invalid_argument, "no stems");
  const Waveform& w0 = stems.front().second;
  for (const auto& [name, w] : stems) {
    MASKBENCH_REQUIRE(w.sample_rate() == w0.sample_rate(), invalid_argument,
                      "stem '" + name + "' is at " + std::to_string(w.sample_rate()) +
                          " Hz but '" + stems.front().first + "' is at " +
                          std::to_string(w0.sample_rate()) + " Hz (resampling is not supported)");
    MASKBENCH_REQUIRE(w.same_shape(w0), shape_mismatch,
                      "stem '" + name + "' has " + std::to_string(w.channels()) + "x" +
                          std::to_string(w.samples()) + " samples, '" + stems.front().first +
                          "' has " + std::to_string(w0.channels()) + "x" +
                          std::to_string(w0.samples()));
  }
}

/// Loads `<dir>/<source>.wav` for each requested source. With no sources
/// given, every .wav file except mixture.wav is loaded in name order.
inline StemSet load_stem_dir(const std::string& dir, std::vector<std::string> sources = {}) {
  namespace fs = std::filesystem;
  MASKBENCH_REQUIRE(fs::is_directory(dir), io, "stem directory " + dir + " does not exist");
  if (sources.empty()) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.is_regular_file() || e.path().extension() != ".wav") continue;
      const std::string stem = e.path().stem().string();
      if (stem != "mixture") sources.push_back(stem);
    }
    std::sort(sources.begin(), sources.end());
    if (sources.empty()) sources = standard_sources();
  }
  std::string missing;
  for (const auto& s : sources)
    if (!fs::is_regular_file(fs::path(dir) / (s + ".wav")))
      missing += (missing.empty() ? "" : ", ") + (fs::path(dir) / (s + ".wav")).string();
  MASKBENCH_REQUIRE(missing.empty(), io, "missing source files: " + missing);
  StemSet out;
  for (const auto& s : sources) out.emplace_back(s, read_wav((fs::path(dir) / (s + ".wav")).string()));
  validate_stems(out);
  return out;
}

/// Song directories under `root`: `root` itself when it holds .wav files or
/// nothing at all, otherwise its subdirectories in name order.
inline std::vector<std::string> list_songs(const std::string& root) {
  namespace fs = std::filesystem;
  MASKBENCH_REQUIRE(fs::is_directory(root), io, "directory " + root + " does not exist");
  std::vector<std::string> songs;
  bool has_wav = false;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") has_wav = true;
    if (e.is_directory()) songs.push_back(e.path().string());
  }
  if (has_wav || songs.empty()) return {root};
  std::sort(songs.begin(), songs.end());
  return songs;
}

struct Segment {
  std::string source;
  Waveform wave;
  std::string origin;  // file or song the segment came from
  std::size_t offset = 0;  // first sample in the origin
};

inline std::size_t seconds_to_samples(double seconds, double sample_rate) {
  MASKBENCH_REQUIRE(seconds > 0.0 && std::isfinite(seconds), invalid_argument,
                    "durations must be positive");
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

inline Waveform slice(const Waveform& w, std::size_t offset, std::size_t length) {
  MASKBENCH_REQUIRE(offset + length <= w.samples(), invalid_argument, "slice out of range");
  Waveform out(w.channels(), length, w.sample_rate());
  for (std::size_t c = 0; c < w.channels(); ++c)
    std::copy_n(w.channel(c).begin() + static_cast<long>(offset), length, out.channel(c).begin());
  return out;
}

/// Deterministic tiling into `seconds`-long segments every `hop_seconds`;
/// a trailing remainder shorter than a segment is dropped.
inline std::vector<Segment> segment(const Waveform& w, double seconds = 3.0,
                                    double hop_seconds = 3.0, const std::string& source = "",
                                    const std::string& origin = "") {
  const std::size_t len = seconds_to_samples(seconds, w.sample_rate());
  const std::size_t hop = seconds_to_samples(hop_seconds, w.sample_rate());
  MASKBENCH_REQUIRE(w.samples() >= len, invalid_argument,
                    "signal of " + std::to_string(w.samples()) +
                        " samples is shorter than one segment of " + std::to_string(len));
  std::vector<Segment> out;
  for (std::size_t off = 0; off + len <= w.samples(); off += hop)
    out.push_back({source, slice(w, off, len), origin, off});
  return out;
}

/// One segment at a uniformly drawn offset (training sampling).
inline Segment random_segment(const Waveform& w, double seconds, std::mt19937_64& rng,
                              const std::string& source = "", const std::string& origin = "") {
  const std::size_t len = seconds_to_samples(seconds, w.sample_rate());
  MASKBENCH_REQUIRE(w.samples() >= len, invalid_argument, "signal shorter than one segment");
  std::uniform_int_distribution<std::size_t> d(0, w.samples() - len);
  const std::size_t off = d(rng);
  return {source, slice(w, off, len), origin, off};
}

/// Mix-audio augmentation: the samplewise sum of two segments of the same
/// source, without rescaling. Not applied to bass.
inline Segment mix_audio_augment(const Segment& a, const Segment& b) {
  MASKBENCH_REQUIRE(a.source == b.source, invalid_argument,
                    "mix-audio augmentation needs one source, got '" + a.source + "' and '" +
                        b.source + "'");
  MASKBENCH_REQUIRE(a.source != "bass", invalid_argument,
                    "mix-audio augmentation is not applied to bass");
  MASKBENCH_REQUIRE(a.wave.same_shape(b.wave) && a.wave.sample_rate() == b.wave.sample_rate(),
                    shape_mismatch, "mix-audio augmentation needs equal-length segments");
  Segment out = a;
  for (std::size_t i = 0; i < out.wave.data().size(); ++i) out.wave.data()[i] += b.wave.data()[i];
  out.origin = a.origin + "+" + b.origin;
  return out;
}

/// Picks two segments of `pool` (same source) with `rng` and mixes them;
/// bass segments are returned unmixed.
inline Segment draw_augmented(const std::vector<Segment>& pool, std::mt19937_64& rng) {
  MASKBENCH_REQUIRE(!pool.empty(), invalid_argument, "empty segment pool");
  std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
  const Segment& a = pool[d(rng)];
  if (a.source == "bass") return a;
  return mix_audio_augment(a, pool[d(rng)]);
}

struct Mixture {
  Segment mixture;
  StemSet targets;
};

/// Sums one segment per source into a mixture; the targets are the given
/// segments, so mixture == sum of targets exactly.
inline Mixture make_mixture(const std::vector<Segment>& segments) {
  MASKBENCH_REQUIRE(segments.size() >= 2, invalid_argument,
                    "a mixture needs at least two sources, got " +
                        std::to_string(segments.size()));
  Mixture out;
  for (const auto& s : segments) {
    for (const auto& [name, w] : out.targets)
      MASKBENCH_REQUIRE(name != s.source, invalid_argument,
                        "source '" + s.source + "' appears twice in one mixture");
    out.targets.emplace_back(s.source, s.wave);
  }
  validate_stems(out.targets);
  out.mixture = {"mixture", segments.front().wave, "", 0};
  for (std::size_t k = 1; k < segments.size(); ++k) {
    auto& d = out.mixture.wave.data();
    const auto& s = segments[k].wave.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
  }
  return out;
}

}  // namespace maskbench::io

#endif  // MASKBENCH_IO_STEMS_HPP
