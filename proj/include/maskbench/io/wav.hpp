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

#ifndef MASKBENCH_IO_WAV_HPP
#define MASKBENCH_IO_WAV_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/signal.hpp"

namespace maskbench::io {

enum class SampleFormat { pcm16, pcm24, float32 };

inline int bits_per_sample(SampleFormat f) {
  switch (f) {
    case SampleFormat::pcm16: return 16;
    case SampleFormat::pcm24: return 24;
    case SampleFormat::float32: return 32;
  }
  return 0;
}

struct WavInfo {
  SampleFormat format = SampleFormat::float32;
  std::string comment;  // LIST/INFO ICMT text, if present
};

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

// The LIST/INFO text found in a LIST chunk body, or "".
inline std::string info_comment(const unsigned char* p, std::size_t n) {
  if (n < 4 || std::string(reinterpret_cast<const char*>(p), 4) != "INFO") return {};
  std::size_t i = 4;
  while (i + 8 <= n) {
    const std::string id(reinterpret_cast<const char*>(p + i), 4);
    const std::size_t len = le32(p + i + 4);
    if (i + 8 + len > n) break;
    if (id == "ICMT") {
      std::string s(reinterpret_cast<const char*>(p + i + 8), len);
      while (!s.empty() && s.back() == '\0') s.pop_back();
      return s;
    }
    i += 8 + len + (len & 1);
  }
  return {};
}

}  // namespace detail

/// Decodes a RIFF/WAVE byte buffer: PCM 16/24-bit or 32-bit float, 1-2
/// channels. PCM maps to [-1, 1) by dividing by 2^(bits-1).
inline Waveform decode_wav(const std::string& bytes, WavInfo* info = nullptr,
                           const std::string& what = "wav data") {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  MASKBENCH_REQUIRE(n >= 12 && bytes.compare(0, 4, "RIFF") == 0 && bytes.compare(8, 4, "WAVE") == 0,
                    format, what + ": not a RIFF/WAVE file");
  bool have_fmt = false;
  std::uint16_t tag = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  std::string comment;
  std::size_t i = 12;
  while (i + 8 <= n) {
    const std::string id(bytes.data() + i, 4);
    const std::size_t len = detail::le32(p + i + 4);
    const std::size_t body = i + 8;
    if (id == "data") {
      MASKBENCH_REQUIRE(have_fmt, format, what + ": data chunk before fmt chunk");
      MASKBENCH_REQUIRE(body + len <= n, format,
                        what + ": truncated data chunk (header says " + std::to_string(len) +
                            " bytes, " + std::to_string(n - body) + " present)");
      MASKBENCH_REQUIRE(len % block_align == 0, format,
                        what + ": data chunk is not a whole number of frames");
      const std::size_t frames = len / block_align;
      const std::size_t bytes_per = bits / 8;
      Waveform w(channels, frames, static_cast<double>(rate));
      const unsigned char* d = p + body;
      for (std::size_t f = 0; f < frames; ++f)
        for (std::size_t c = 0; c < channels; ++c) {
          const unsigned char* s = d + f * block_align + c * bytes_per;
          double v = 0.0;
          if (tag == 3) {
            v = std::bit_cast<float>(detail::le32(s));
          } else if (bits == 16) {
            v = static_cast<std::int16_t>(detail::le16(s)) / 32768.0;
          } else {
            std::int32_t x = s[0] | (s[1] << 8) | (s[2] << 16);
            if (x & 0x800000) x -= 0x1000000;
            v = x / 8388608.0;
          }
          w.at(c, f) = v;
        }
      if (info) {
        info->format = tag == 3 ? SampleFormat::float32
                                : (bits == 16 ? SampleFormat::pcm16 : SampleFormat::pcm24);
        // a LIST chunk may also follow the data
        std::size_t j = body + len + (len & 1);
        while (comment.empty() && j + 8 <= n) {
          const std::size_t l2 = detail::le32(p + j + 4);
          if (bytes.compare(j, 4, "LIST") == 0 && j + 8 + l2 <= n)
            comment = detail::info_comment(p + j + 8, l2);
          j += 8 + l2 + (l2 & 1);
        }
        info->comment = comment;
      }
      return w;
    }
    MASKBENCH_REQUIRE(body + len <= n, format, what + ": truncated " + id + " chunk");
    if (id == "fmt ") {
      MASKBENCH_REQUIRE(len >= 16, format, what + ": fmt chunk too short");
      tag = detail::le16(p + body);
      channels = detail::le16(p + body + 2);
      rate = detail::le32(p + body + 4);
      block_align = detail::le16(p + body + 12);
      bits = detail::le16(p + body + 14);
      if (tag == 0xFFFE) {
        MASKBENCH_REQUIRE(len >= 40, format, what + ": extensible fmt chunk too short");
        tag = detail::le16(p + body + 24);  // first two bytes of the subformat GUID
      }
      MASKBENCH_REQUIRE(tag == 1 || tag == 3, format,
                        what + ": unsupported codec (format tag " + std::to_string(tag) + ")");
      MASKBENCH_REQUIRE((tag == 1 && (bits == 16 || bits == 24)) || (tag == 3 && bits == 32),
                        format, what + ": unsupported sample format (" + std::to_string(bits) +
                                    "-bit " + (tag == 1 ? "PCM" : "float") + ")");
      MASKBENCH_REQUIRE(channels == 1 || channels == 2, format,
                        what + ": only mono and stereo are supported, file has " +
                            std::to_string(channels) + " channels");
      MASKBENCH_REQUIRE(rate > 0, format, what + ": zero sample rate");
      MASKBENCH_REQUIRE(block_align == channels * (bits / 8), format,
                        what + ": inconsistent block alignment");
      have_fmt = true;
    } else if (id == "LIST") {
      comment = detail::info_comment(p + body, len);
    }
    i = body + len + (len & 1);
  }
  throw Error(ErrorCategory::format, what + ": no data chunk");
}

inline Waveform read_wav(const std::string& path, WavInfo* info = nullptr) {
  std::ifstream is(path, std::ios::binary);
  MASKBENCH_REQUIRE(is.is_open(), io, "cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return decode_wav(buf.str(), info, path);
}

/// Encodes a waveform. PCM samples are rounded and clipped to the
/// representable range; float32 keeps every sample that fits a float
/// exactly. A non-empty comment is stored as a LIST/INFO ICMT chunk ahead of
/// the audio.
inline std::string encode_wav(const Waveform& w, SampleFormat fmt = SampleFormat::float32,
                              const std::string& comment = "") {
  MASKBENCH_REQUIRE(w.channels() == 1 || w.channels() == 2, invalid_argument,
                    "wav output supports mono and stereo only");
  const double rate = std::round(w.sample_rate());
  MASKBENCH_REQUIRE(rate >= 1.0 && rate < 4294967296.0, invalid_argument,
                    "sample rate does not fit a wav header");
  const int bits = bits_per_sample(fmt);
  const std::size_t bytes_per = static_cast<std::size_t>(bits / 8);
  const std::size_t block = bytes_per * w.channels();
  const std::size_t data_len = block * w.samples();
  MASKBENCH_REQUIRE(data_len < 0xFFFFFF00u, invalid_argument, "waveform too long for wav");

  std::string list;
  if (!comment.empty()) {
    std::string text = comment;
    text.push_back('\0');
    if (text.size() & 1) text.push_back('\0');
    list = "INFO";
    list += "ICMT";
    detail::put32(list, static_cast<std::uint32_t>(text.size()));
    list += text;
  }

  std::string s;
  s.reserve(44 + list.size() + 8 + data_len);
  s += "RIFF";
  detail::put32(s, 0);  // patched below
  s += "WAVE";
  s += "fmt ";
  detail::put32(s, 16);
  detail::put16(s, fmt == SampleFormat::float32 ? 3 : 1);
  detail::put16(s, static_cast<std::uint16_t>(w.channels()));
  detail::put32(s, static_cast<std::uint32_t>(rate));
  detail::put32(s, static_cast<std::uint32_t>(rate) * static_cast<std::uint32_t>(block));
  detail::put16(s, static_cast<std::uint16_t>(block));
  detail::put16(s, static_cast<std::uint16_t>(bits));
  if (!list.empty()) {
    s += "LIST";
    detail::put32(s, static_cast<std::uint32_t>(list.size()));
    s += list;
  }
  s += "data";
  detail::put32(s, static_cast<std::uint32_t>(data_len));
  const double scale = std::ldexp(1.0, bits - 1);
  for (std::size_t f = 0; f < w.samples(); ++f)
    for (std::size_t c = 0; c < w.channels(); ++c) {
      const double v = w.at(c, f);
      if (fmt == SampleFormat::float32) {
        detail::put32(s, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        continue;
      }
      const double q = std::clamp(std::round(v * scale), -scale, scale - 1.0);
      const auto x = static_cast<std::int32_t>(q);
      for (std::size_t b = 0; b < bytes_per; ++b)
        s.push_back(static_cast<char>((static_cast<std::uint32_t>(x) >> (8 * b)) & 0xff));
    }
  const auto riff = static_cast<std::uint32_t>(s.size() - 8);
  for (int b = 0; b < 4; ++b) s[4 + b] = static_cast<char>((riff >> (8 * b)) & 0xff);
  return s;
}

inline void write_wav(const std::string& path, const Waveform& w,
                      SampleFormat fmt = SampleFormat::float32, const std::string& comment = "") {
  const std::string bytes = encode_wav(w, fmt, comment);
  std::ofstream os(path, std::ios::binary);
  MASKBENCH_REQUIRE(os.is_open(), io, "cannot open " + path + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  MASKBENCH_REQUIRE(os.good(), io, "failed writing " + path);
}

}  // namespace maskbench::io

#endif  // MASKBENCH_IO_WAV_HPP
