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

#ifndef MASKBENCH_REPORT_HPP
#define MASKBENCH_REPORT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "maskbench/mask_stats.hpp"

#ifndef MASKBENCH_VERSION
#define MASKBENCH_VERSION "0.0.0"
#endif

namespace maskbench::report {

inline constexpr const char* kVersion = MASKBENCH_VERSION;

/// Fully resolved run configuration, kept sorted by key.
using ResolvedConfig = std::map<std::string, std::string>;

inline std::string canonical(const ResolvedConfig& cfg) {
  std::string s;
  for (const auto& [k, v] : cfg) s += k + "=" + v + "\n";
  return s;
}

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
inline std::string config_hash(const ResolvedConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string provenance(const ResolvedConfig& cfg, const std::string& command) {
  const auto seed = cfg.find("seed");
  return std::string("maskbench ") + kVersion + " command=" + command +
         " config_hash=" + config_hash(cfg) +
         " seed=" + (seed == cfg.end() ? std::string("none") : seed->second);
}

/// Provenance and resolved config as '#'-prefixed lines (CSV and text).
inline std::string comment_header(const ResolvedConfig& cfg, const std::string& command) {
  std::string s = "# " + provenance(cfg, command) + "\n";
  for (const auto& [k, v] : cfg) s += "# " + k + " = " + v + "\n";
  return s;
}

inline std::string format_number(double v, int digits = 6) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct SvgOptions {
  double range = 3.0;        // axes span [-range, range]
  int size = 480;            // pixels
  std::size_t max_points = 20000;
};

/// Scatter of complex mask values in the complex plane with the unit circle
/// drawn once. Points are squares so the circle stays the only <circle>.
inline std::string scatter_svg(const std::vector<std::pair<double, double>>& points,
                               const std::string& title, const std::string& header_comment,
                               const SvgOptions& opt = {}) {
  const double half = opt.size / 2.0;
  const double scale = half / opt.range;
  auto fx = [&](double re) { return half + re * scale; };
  auto fy = [&](double im) { return half - im * scale; };
  auto esc = [](std::string s) {
    std::string out;
    for (char c : s) {
      if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else if (c == '&') out += "&amp;";
      else out += c;
    }
    return out;
  };
  std::string comment = header_comment;
  for (std::size_t p; (p = comment.find("--")) != std::string::npos;) comment.replace(p, 2, "- -");
  std::ostringstream os;
  os << "<!-- " << comment << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.size << "\" height=\""
     << opt.size << "\" viewBox=\"0 0 " << opt.size << ' ' << opt.size << "\">\n";
  os << "<title>" << esc(title) << "</title>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << opt.size << "\" height=\"" << opt.size
     << "\" fill=\"white\"/>\n";
  os << "<line x1=\"0\" y1=\"" << half << "\" x2=\"" << opt.size << "\" y2=\"" << half
     << "\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";
  os << "<line x1=\"" << half << "\" y1=\"0\" x2=\"" << half << "\" y2=\"" << opt.size
     << "\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";
  os << "<g fill=\"#1f77b4\" fill-opacity=\"0.35\">\n";
  std::size_t drawn = 0;
  for (const auto& [re, im] : points) {
    if (drawn >= opt.max_points) break;
    if (std::abs(re) > opt.range || std::abs(im) > opt.range) continue;
    os << "<rect x=\"" << format_number(fx(re) - 0.75, 5) << "\" y=\""
       << format_number(fy(im) - 0.75, 5) << "\" width=\"1.5\" height=\"1.5\"/>\n";
    ++drawn;
  }
  os << "</g>\n";
  os << "<circle cx=\"" << half << "\" cy=\"" << half << "\" r=\"" << format_number(scale, 8)
     << "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace maskbench::report

#endif  // MASKBENCH_REPORT_HPP
