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

#ifndef MASKBENCH_NN_WEIGHTS_HPP
#define MASKBENCH_NN_WEIGHTS_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/nn/model.hpp"
#include "maskbench/stft.hpp"

namespace maskbench::nn {

// Layout, all integers little-endian u32:
//   "MBWT" version header_len header[header_len] count
//   count x { name_len name rank dims[rank] float32[prod(dims)] }
inline constexpr std::array<char, 4> kWeightsMagic{'M', 'B', 'W', 'T'};
inline constexpr std::uint32_t kWeightsVersion = 1;
inline constexpr char kMetaTensorName[] = "meta.config";

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

inline std::uint32_t get_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  MASKBENCH_REQUIRE(is.gcount() == 4, format,
                    std::string("weights file truncated while reading ") + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

/// `header` is free text (provenance) stored ahead of the tensors.
inline void write_weights(std::ostream& os, const std::vector<NamedTensor>& tensors,
                          const std::string& header = "") {
  os.write(kWeightsMagic.data(), 4);
  detail::put_u32(os, kWeightsVersion);
  detail::put_u32(os, static_cast<std::uint32_t>(header.size()));
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  detail::put_u32(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    std::size_t count = 1;
    for (auto d : t.dims) count *= d;
    MASKBENCH_REQUIRE(count == t.data.size(), shape_mismatch,
                      "tensor " + t.name + " has " + std::to_string(t.data.size()) +
                          " values for its dims");
    detail::put_u32(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    detail::put_u32(os, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) detail::put_u32(os, d);
    for (float v : t.data) detail::put_u32(os, std::bit_cast<std::uint32_t>(v));
  }
  MASKBENCH_REQUIRE(os.good(), io, "failed writing weights");
}

inline std::vector<NamedTensor> read_weights(std::istream& is, std::string* header = nullptr) {
  std::array<char, 4> magic{};
  is.read(magic.data(), 4);
  MASKBENCH_REQUIRE(is.gcount() == 4 && magic == kWeightsMagic, format,
                    "not a weights file (bad magic)");
  const std::uint32_t version = detail::get_u32(is, "version");
  MASKBENCH_REQUIRE(version == kWeightsVersion, format,
                    "unsupported weights format version " + std::to_string(version) +
                        " (expected " + std::to_string(kWeightsVersion) + ")");
  const std::uint32_t header_len = detail::get_u32(is, "header length");
  MASKBENCH_REQUIRE(header_len <= (1u << 20), format,
                    "implausible header length " + std::to_string(header_len));
  std::string text(header_len, '\0');
  is.read(text.data(), header_len);
  MASKBENCH_REQUIRE(is.gcount() == static_cast<std::streamsize>(header_len), format,
                    "weights file truncated in the header");
  if (header) *header = std::move(text);
  const std::uint32_t count = detail::get_u32(is, "tensor count");
  std::vector<NamedTensor> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedTensor t;
    const std::uint32_t len = detail::get_u32(is, "name length");
    MASKBENCH_REQUIRE(len >= 1 && len <= 4096, format,
                      "implausible tensor name length " + std::to_string(len));
    t.name.resize(len);
    is.read(t.name.data(), len);
    MASKBENCH_REQUIRE(is.gcount() == static_cast<std::streamsize>(len), format,
                      "weights file truncated in a tensor name");
    const std::uint32_t rank = detail::get_u32(is, "rank");
    MASKBENCH_REQUIRE(rank <= 8, format, "tensor " + t.name + " has implausible rank " +
                                             std::to_string(rank));
    std::uint64_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      t.dims.push_back(detail::get_u32(is, "dims"));
      n *= t.dims.back();
      MASKBENCH_REQUIRE(n <= (std::uint64_t{1} << 31), format,
                        "tensor " + t.name + " is implausibly large");
    }
    t.data.resize(static_cast<std::size_t>(n));
    for (auto& v : t.data) v = std::bit_cast<float>(detail::get_u32(is, "tensor data"));
    out.push_back(std::move(t));
  }
  return out;
}

inline void save_weights(const std::string& path, const std::vector<NamedTensor>& tensors,
                         const std::string& header = "") {
  std::ofstream os(path, std::ios::binary);
  MASKBENCH_REQUIRE(os.is_open(), io, "cannot open " + path + " for writing");
  write_weights(os, tensors, header);
}

inline std::vector<NamedTensor> load_weights(const std::string& path,
                                            std::string* header = nullptr) {
  std::ifstream is(path, std::ios::binary);
  MASKBENCH_REQUIRE(is.is_open(), io, "cannot open " + path);
  return read_weights(is, header);
}

/// A model together with the analysis settings it was trained with.
struct StoredModel {
  std::unique_ptr<Model<float>> model;
  dsp::StftConfig stft;
  double sample_rate = 44100.0;
};

/// All parameters and buffers, preceded by a meta tensor describing the
/// architecture and STFT so the file is self-contained.
template <class T>
std::vector<NamedTensor> export_model(Model<T>& model, const dsp::StftConfig& stft,
                                      double sample_rate) {
  const ModelConfig& c = model.config();
  std::vector<float> meta{static_cast<float>(c.architecture == Architecture::resunet),
                          static_cast<float>(c.input_channels),
                          static_cast<float>(c.freq_bins),
                          static_cast<float>(c.rcbs_per_block),
                          static_cast<float>(c.intermediate_blocks),
                          static_cast<float>(heads_per_channel(c.heads)),
                          static_cast<float>(c.leaky_slope),
                          static_cast<float>(stft.window_size),
                          static_cast<float>(stft.hop_size),
                          static_cast<float>(stft.center_pad),
                          static_cast<float>(sample_rate),
                          static_cast<float>(c.depth())};
  for (auto w : c.widths) meta.push_back(static_cast<float>(w));
  std::vector<NamedTensor> out;
  out.push_back({kMetaTensorName, {static_cast<std::uint32_t>(meta.size())}, std::move(meta)});
  for (auto* p : model.parameters()) {
    NamedTensor t{p->name, {}, {}};
    for (auto d : p->shape) t.dims.push_back(static_cast<std::uint32_t>(d));
    t.data.assign(p->value.begin(), p->value.end());
    out.push_back(std::move(t));
  }
  return out;
}

/// Rebuilds a float model from exported tensors. Every parameter must be
/// present with the expected shape and no tensor may be left over.
inline StoredModel import_model(const std::vector<NamedTensor>& tensors) {
  MASKBENCH_REQUIRE(!tensors.empty() && tensors.front().name == kMetaTensorName, format,
                    "weights file has no model description");
  const auto& m = tensors.front().data;
  MASKBENCH_REQUIRE(m.size() >= 12, format, "model description too short");
  auto as_size = [](float v) { return static_cast<std::size_t>(v); };
  const std::size_t depth = as_size(m[11]);
  MASKBENCH_REQUIRE(m.size() == 12 + depth, format, "model description has wrong length");
  ModelConfig c;
  c.architecture = m[0] != 0.0f ? Architecture::resunet : Architecture::unet;
  c.input_channels = as_size(m[1]);
  c.freq_bins = as_size(m[2]);
  c.rcbs_per_block = as_size(m[3]);
  c.intermediate_blocks = as_size(m[4]);
  switch (as_size(m[5])) {
    case 1: c.heads = HeadMode::mask_only; break;
    case 3: c.heads = HeadMode::decouple; break;
    case 4: c.heads = HeadMode::decouple_plus; break;
    default: throw Error(ErrorCategory::format, "unknown head layout in weights file");
  }
  c.leaky_slope = m[6];
  c.widths.clear();
  for (std::size_t k = 0; k < depth; ++k) c.widths.push_back(as_size(m[12 + k]));

  StoredModel out;
  out.stft.window_size = as_size(m[7]);
  out.stft.hop_size = as_size(m[8]);
  out.stft.center_pad = m[9] != 0.0f;
  out.sample_rate = m[10];
  try {
    out.stft.validate();
    MASKBENCH_REQUIRE(out.stft.bins() == c.freq_bins, format,
                      "stored stft does not match the model's frequency bins");
    out.model = std::make_unique<Model<float>>(c);
  } catch (const Error& e) {
    throw Error(ErrorCategory::format, std::string("invalid model description: ") + e.what());
  }

  const auto params = out.model->parameters();
  MASKBENCH_REQUIRE(tensors.size() == params.size() + 1, format,
                    "weights file holds " + std::to_string(tensors.size() - 1) +
                        " tensors, model needs " + std::to_string(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const NamedTensor& t = tensors[k + 1];
    Parameter<float>& p = *params[k];
    MASKBENCH_REQUIRE(t.name == p.name, format,
                      "expected tensor " + p.name + ", found " + t.name);
    bool same = t.dims.size() == p.shape.size();
    for (std::size_t r = 0; same && r < t.dims.size(); ++r) same = t.dims[r] == p.shape[r];
    MASKBENCH_REQUIRE(same, shape_mismatch, "tensor " + t.name + " has the wrong shape");
    p.value = t.data;
  }
  out.model->set_training(false);
  return out;
}

}  // namespace maskbench::nn

#endif  // MASKBENCH_NN_WEIGHTS_HPP
