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

// maskbench command-line front end.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "maskbench/benchmark.hpp"
#include "maskbench/error.hpp"
#include "maskbench/io/stems.hpp"
#include "maskbench/io/wav.hpp"
#include "maskbench/mask_stats.hpp"
#include "maskbench/masks.hpp"
#include "maskbench/nn/pipeline.hpp"
#include "maskbench/nn/train.hpp"
#include "maskbench/nn/weights.hpp"
#include "maskbench/report.hpp"
#include "maskbench/sdr.hpp"
#include "maskbench/stft.hpp"

namespace {

using namespace maskbench;
using report::ResolvedConfig;
using json = nlohmann::ordered_json;
using masks::MaskStats;
using masks::MaskStatsOptions;
using masks::angle_uniformity_chi2;
using masks::mask_stats;
using masks::kAngleBuckets;

struct Key {
  std::string name;
  std::string fallback;  // empty and required => must be supplied
  std::string help;
  bool required = false;
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  std::vector<Key> keys;
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
};

Command& add_command(CLI::App& app, std::vector<std::unique_ptr<Command>>& all,
                     const std::string& name, const std::string& help, std::vector<Key> keys) {
  auto cmd = std::make_unique<Command>();
  cmd->name = name;
  cmd->app = app.add_subcommand(name, help);
  cmd->keys = std::move(keys);
  cmd->app->add_option("--config", cmd->config_path, "key=value file; flags take precedence");
  for (const auto& k : cmd->keys) {
    std::string h = k.help;
    if (!k.fallback.empty()) h += " [default: " + k.fallback + "]";
    if (k.required) h += " (required)";
    cmd->options[k.name] = cmd->app->add_option("--" + k.name, cmd->flags[k.name], h);
  }
  all.push_back(std::move(cmd));
  return *all.back();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// flags > config file > MASKBENCH_SEED (seed only) > defaults
ResolvedConfig resolve(const Command& cmd) {
  std::map<std::string, std::string> file;
  if (!cmd.config_path.empty()) {
    std::ifstream is(cmd.config_path);
    MASKBENCH_REQUIRE(is.is_open(), io, "cannot open config file " + cmd.config_path);
    std::string line;
    for (int no = 1; std::getline(is, line); ++no) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      const std::string where = cmd.config_path + ":" + std::to_string(no);
      MASKBENCH_REQUIRE(eq != std::string::npos, invalid_argument,
                        where + ": expected key=value");
      const std::string key = trim(line.substr(0, eq));
      const bool known = std::any_of(cmd.keys.begin(), cmd.keys.end(),
                                     [&](const Key& k) { return k.name == key; });
      MASKBENCH_REQUIRE(known, invalid_argument,
                        where + ": unknown key '" + key + "' for " + cmd.name);
      file[key] = trim(line.substr(eq + 1));
    }
  }
  ResolvedConfig cfg;
  for (const auto& k : cmd.keys) {
    std::string v = k.fallback;
    if (cmd.options.at(k.name)->count() > 0) {
      v = cmd.flags.at(k.name);
    } else if (file.count(k.name)) {
      v = file.at(k.name);
    } else if (k.name == "seed") {
      if (const char* env = std::getenv("MASKBENCH_SEED"); env && *env) v = env;
    }
    MASKBENCH_REQUIRE(!(k.required && v.empty()), invalid_argument,
                      cmd.name + ": --" + k.name + " is required");
    cfg[k.name] = v;
  }
  return cfg;
}

double get_double(const ResolvedConfig& c, const std::string& key) {
  const std::string& s = c.at(key);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  MASKBENCH_REQUIRE(r.ec == std::errc() && r.ptr == s.data() + s.size(), invalid_argument,
                    "--" + key + ": '" + s + "' is not a number");
  return v;
}

std::uint64_t get_uint(const ResolvedConfig& c, const std::string& key) {
  const std::string& s = c.at(key);
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  MASKBENCH_REQUIRE(r.ec == std::errc() && r.ptr == s.data() + s.size(), invalid_argument,
                    "--" + key + ": '" + s + "' is not a non-negative integer");
  return v;
}

bool get_bool(const ResolvedConfig& c, const std::string& key) {
  const std::string& s = c.at(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(ErrorCategory::invalid_argument, "--" + key + ": expected true or false");
}

std::vector<std::string> get_list(const ResolvedConfig& c, const std::string& key) {
  std::vector<std::string> out;
  std::stringstream ss(c.at(key));
  for (std::string item; std::getline(ss, item, ',');)
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

dsp::StftConfig get_stft(const ResolvedConfig& c) {
  dsp::StftConfig s;
  s.window_size = get_uint(c, "window");
  s.hop_size = get_uint(c, "hop");
  s.validate();
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  MASKBENCH_REQUIRE(os.is_open(), io, "cannot open " + path + " for writing");
  os << text;
  MASKBENCH_REQUIRE(os.good(), io, "failed writing " + path);
}

std::vector<std::string> songs_in(const std::string& dir) {
  return io::list_songs(dir);
}

std::string song_name(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

// ---------------------------------------------------------------- commands

std::vector<Key> stft_keys() {
  return {{"window", "2048", "STFT window size (samples)"},
          {"hop", "441", "STFT hop size (samples)"}};
}

int oracle_bench(const ResolvedConfig& cfg) {
  bss::BenchmarkOptions opt;
  opt.stft = get_stft(cfg);
  opt.mask_eps = get_double(cfg, "mask-eps");
  opt.sdr_eps = get_double(cfg, "sdr-eps");
  const std::string agg = cfg.at("aggregation");
  MASKBENCH_REQUIRE(agg == "global" || agg == "windowed-median", invalid_argument,
                    "--aggregation must be global or windowed-median");
  opt.aggregation = agg == "global" ? bss::Aggregation::global : bss::Aggregation::windowed_median;
  opt.window_s = get_double(cfg, "window-seconds");
  const auto variants = bss::parse_variant_list(cfg.at("variants"));
  const auto sources = get_list(cfg, "sources");

  std::vector<bss::SdrReport> per_song;
  const auto songs = songs_in(cfg.at("stems"));
  std::string per_song_csv = "song,source,variant,sdr_db\n";
  for (const auto& song : songs) {
    const auto stems = io::load_stem_dir(song, sources);
    MASKBENCH_REQUIRE(stems.size() >= 2, invalid_argument,
                      "song " + song + " has fewer than two sources");
    per_song.push_back(bss::oracle_benchmark(stems, variants, opt));
    for (const auto& c : per_song.back().cells)
      per_song_csv += song_name(song) + "," + c.source + "," + c.variant.token() + "," +
                      report::format_number(bss::cap_sdr(c.sdr_db), 8) + "\n";
  }
  // median over songs for every (source, variant)
  bss::SdrReport agg_report = per_song.front();
  for (auto& cell : agg_report.cells) {
    std::vector<double> vals;
    for (const auto& r : per_song) {
      const auto v = r.find(cell.source, cell.variant);
      MASKBENCH_REQUIRE(v.has_value(), invalid_argument,
                        "songs differ in their sources (" + cell.source + " missing)");
      vals.push_back(*v);
    }
    cell.sdr_db = bss::median(vals);
  }
  const std::string header = report::comment_header(cfg, "oracle-bench");
  std::cout << "median SDR (dB) over " << songs.size() << " song(s), "
            << (opt.aggregation == bss::Aggregation::global ? "global" : "windowed-median")
            << " aggregation\n"
            << bss::report_table(agg_report);
  if (!cfg.at("out").empty()) write_text(cfg.at("out"), header + bss::report_csv(agg_report));
  if (!cfg.at("out-songs").empty()) write_text(cfg.at("out-songs"), header + per_song_csv);
  if (!cfg.at("out-table").empty())
    write_text(cfg.at("out-table"), header + bss::report_table(agg_report));
  return 0;
}

json stats_json(const std::string& song, const std::string& source, const MaskStats& st,
                bool with_percentiles) {
  json j;
  j["song"] = song;
  j["source"] = source;
  j["total_bins"] = st.total_bins;
  j["bins_over_unit"] = st.bins_over_unit;
  j["fraction_over_unit"] = st.fraction_over_unit;
  j["angle_histogram"] = st.angle_histogram;
  if (with_percentiles) {
    j["magnitude_p50"] = st.magnitude_p50;
    j["magnitude_p90"] = st.magnitude_p90;
    j["magnitude_p99"] = st.magnitude_p99;
  }
  j["angle_uniformity_chi2"] = angle_uniformity_chi2(st);
  return j;
}

int analyze_masks(const ResolvedConfig& cfg) {
  const auto stft_cfg = get_stft(cfg);
  const double eps = get_double(cfg, "mask-eps");
  MaskStatsOptions opt;
  opt.energy_floor_db = get_double(cfg, "floor-db");
  opt.max_scatter = get_uint(cfg, "max-scatter");
  const std::uint64_t seed = get_uint(cfg, "seed");
  const auto sources = get_list(cfg, "sources");
  report::SvgOptions svg_opt;
  svg_opt.range = get_double(cfg, "svg-range");
  MASKBENCH_REQUIRE(svg_opt.range > 0.0, invalid_argument, "--svg-range must be positive");

  const std::string header = report::comment_header(cfg, "analyze-masks");
  std::string jsonl = json{{"provenance", report::provenance(cfg, "analyze-masks")},
                           {"config", cfg}}.dump() + "\n";
  std::string scatter = header + "song,source,real,imag\n";
  std::vector<std::string> order;
  std::map<std::string, MaskStats> pooled;
  std::map<std::string, std::vector<std::pair<double, double>>> points;
  std::size_t n_songs = 0;

  for (const auto& song : songs_in(cfg.at("stems"))) {
    ++n_songs;
    const auto stems = io::load_stem_dir(song, sources);
    MASKBENCH_REQUIRE(stems.size() >= 2, invalid_argument,
                      "song " + song + " has fewer than two sources");
    Waveform mix(stems.front().second.channels(), stems.front().second.samples(),
                 stems.front().second.sample_rate());
    for (const auto& [name, w] : stems)
      for (std::size_t i = 0; i < w.data().size(); ++i) mix.data()[i] += w.data()[i];
    const auto x = dsp::stft(mix, stft_cfg);
    for (const auto& [name, w] : stems) {
      MaskStatsOptions o = opt;
      o.seed = nn::splitmix64(seed ^ nn::fnv1a(song_name(song) + "/" + name));
      const auto st = mask_stats(masks::compute_cirm(dsp::stft(w, stft_cfg), x, eps), x, o);
      jsonl += stats_json(song_name(song), name, st, true).dump() + "\n";
      if (!pooled.count(name)) order.push_back(name);
      MaskStats& p = pooled[name];
      p.total_bins += st.total_bins;
      p.bins_over_unit += st.bins_over_unit;
      for (std::size_t b = 0; b < kAngleBuckets; ++b) p.angle_histogram[b] += st.angle_histogram[b];
      if (n_songs == 1) {
        p.magnitude_p50 = st.magnitude_p50;
        p.magnitude_p90 = st.magnitude_p90;
        p.magnitude_p99 = st.magnitude_p99;
      }
      for (const auto& [re, im] : st.scatter_sample) {
        scatter += song_name(song) + "," + name + "," + report::format_number(re, 9) + "," +
                   report::format_number(im, 9) + "\n";
        points[name].emplace_back(re, im);
      }
    }
  }

  std::printf("%-16s %12s %12s %10s", "source", "bins", "over_unit", "fraction");
  if (n_songs == 1) std::printf(" %8s %8s %8s", "p50", "p90", "p99");
  std::printf("\n");
  for (const auto& name : order) {
    MaskStats& p = pooled[name];
    p.fraction_over_unit =
        p.total_bins ? static_cast<double>(p.bins_over_unit) / static_cast<double>(p.total_bins)
                     : 0.0;
    if (n_songs > 1) jsonl += stats_json("*", name, p, false).dump() + "\n";
    std::printf("%-16s %12zu %12zu %10.3f", name.c_str(), p.total_bins, p.bins_over_unit,
                p.fraction_over_unit);
    if (n_songs == 1)
      std::printf(" %8.3f %8.3f %8.3f", p.magnitude_p50, p.magnitude_p90, p.magnitude_p99);
    std::printf("\n");
  }
  std::printf("floor_db = %s\n", cfg.at("floor-db").c_str());

  if (!cfg.at("out").empty()) write_text(cfg.at("out"), jsonl);
  if (!cfg.at("out-scatter").empty()) write_text(cfg.at("out-scatter"), scatter);
  if (!cfg.at("out-svg").empty()) {
    std::string src = cfg.at("svg-source");
    if (src.empty()) src = pooled.count("vocals") ? "vocals" : order.front();
    MASKBENCH_REQUIRE(pooled.count(src), invalid_argument,
                      "--svg-source '" + src + "' is not among the analysed sources");
    write_text(cfg.at("out-svg"),
               report::scatter_svg(points[src], "cIRM values: " + src,
                                   report::provenance(cfg, "analyze-masks"), svg_opt));
  }
  return 0;
}

nn::HeadMode parse_heads(const std::string& s) {
  if (s == "mask") return nn::HeadMode::mask_only;
  if (s == "decouple") return nn::HeadMode::decouple;
  if (s == "decouple-plus") return nn::HeadMode::decouple_plus;
  throw Error(ErrorCategory::invalid_argument,
              "--heads must be mask, decouple or decouple-plus, got '" + s + "'");
}

int train_toy(const ResolvedConfig& cfg) {
  nn::ToyConfig t;
  t.seed = get_uint(cfg, "seed");
  t.steps = get_uint(cfg, "steps");
  t.learning_rate = get_double(cfg, "lr");
  t.batch_size = get_uint(cfg, "batch");
  t.train_examples = get_uint(cfg, "train-examples");
  t.segment_samples = get_uint(cfg, "segment-samples");
  t.sample_rate = get_double(cfg, "sample-rate");
  t.channels = get_uint(cfg, "channels");
  t.stft = get_stft(cfg);
  t.heads = parse_heads(cfg.at("heads"));
  t.widths.clear();
  for (const auto& w : get_list(cfg, "widths")) {
    ResolvedConfig one{{"widths", w}};
    t.widths.push_back(get_uint(one, "widths"));
  }
  t.rcbs_per_block = get_uint(cfg, "rcbs");
  t.intermediate_blocks = get_uint(cfg, "icbs");
  MASKBENCH_REQUIRE(t.train_examples >= 1 || t.steps == 0, invalid_argument,
                    "--train-examples must be >= 1");
  if (t.steps == 0) t.calibration_examples = 0;

  nn::Model<float> model(t.model_config());
  std::string log = report::comment_header(cfg, "train-toy") + "step,lr,loss\n";
  const auto run = nn::train_toy(model, t, [&](std::size_t step, double loss) {
    log += std::to_string(step) + "," +
           report::format_number(nn::lr_schedule(step, t.learning_rate), 9) + "," +
           report::format_number(loss, 12) + "\n";
  });
  if (get_bool(cfg, "identity-heads")) nn::set_identity_heads(model);
  model.set_training(false);
  nn::save_weights(cfg.at("out"), nn::export_model(model, t.stft, t.sample_rate),
                   report::provenance(cfg, "train-toy"));
  if (!cfg.at("log").empty()) write_text(cfg.at("log"), log);
  std::cout << "parameters " << model.trainable_parameter_count() << ", conv layers "
            << nn::count_conv_layers(model) << "\n";
  if (!run.losses.empty()) {
    std::cout << "initial loss " << report::format_number(run.losses.front(), 8)
              << ", final loss " << report::format_number(run.losses.back(), 8) << ", ratio "
              << report::format_number(run.losses.back() / run.losses.front(), 4) << "\n";
  }
  std::cout << "wrote " << cfg.at("out") << "\n";
  return 0;
}

io::SampleFormat parse_format(const std::string& s) {
  if (s == "float32") return io::SampleFormat::float32;
  if (s == "pcm16") return io::SampleFormat::pcm16;
  if (s == "pcm24") return io::SampleFormat::pcm24;
  throw Error(ErrorCategory::invalid_argument,
              "--format must be float32, pcm16 or pcm24, got '" + s + "'");
}

int separate(const ResolvedConfig& cfg) {
  const auto fmt = parse_format(cfg.at("format"));
  nn::StoredModel stored = nn::import_model(nn::load_weights(cfg.at("weights")));
  const Waveform mix = io::read_wav(cfg.at("input"));
  MASKBENCH_REQUIRE(mix.sample_rate() == stored.sample_rate, invalid_argument,
                    "input is at " + report::format_number(mix.sample_rate()) +
                        " Hz but the model was trained at " +
                        report::format_number(stored.sample_rate) +
                        " Hz (resampling is not supported)");
  const Waveform out = nn::separate(*stored.model, mix, stored.stft);
  io::write_wav(cfg.at("output"), out, fmt, report::provenance(cfg, "separate"));
  std::cout << "wrote " << cfg.at("output") << " (" << out.channels() << " ch, "
            << out.samples() << " samples)\n";
  return 0;
}

int eval(const ResolvedConfig& cfg) {
  const Waveform ref = io::read_wav(cfg.at("reference"));
  const Waveform est = io::read_wav(cfg.at("estimate"));
  MASKBENCH_REQUIRE(ref.same_shape(est), shape_mismatch,
                    "reference is " + std::to_string(ref.channels()) + "x" +
                        std::to_string(ref.samples()) + ", estimate is " +
                        std::to_string(est.channels()) + "x" + std::to_string(est.samples()));
  MASKBENCH_REQUIRE(ref.sample_rate() == est.sample_rate(), invalid_argument,
                    "reference and estimate sample rates differ");
  const double eps = get_double(cfg, "sdr-eps");
  const double g = bss::cap_sdr(bss::sdr(ref, est, eps));
  const double w =
      bss::cap_sdr(bss::windowed_median_sdr(ref, est, get_double(cfg, "window-seconds"), eps));
  std::cout << "sdr_global_db " << report::format_number(g, 8) << "\n"
            << "sdr_windowed_median_db " << report::format_number(w, 8) << "\n";
  if (!cfg.at("out").empty()) {
    json j{{"provenance", report::provenance(cfg, "eval")}, {"config", cfg}};
    json r{{"reference", cfg.at("reference")},
           {"estimate", cfg.at("estimate")},
           {"sdr_global_db", g},
           {"sdr_windowed_median_db", w}};
    write_text(cfg.at("out"), j.dump() + "\n" + r.dump() + "\n");
  }
  return 0;
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::invalid_argument: return 2;
    case ErrorCategory::shape_mismatch: return 3;
    case ErrorCategory::io: return 4;
    case ErrorCategory::format: return 5;
    case ErrorCategory::numeric: return 6;
    case ErrorCategory::state: return 7;
  }
  return 1;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maskbench: mask calculus, oracle benchmarks and desk-scale separation models"};
  app.set_version_flag("--version", std::string("maskbench ") + report::kVersion);
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> cmds;

  auto with_stft = [](std::vector<Key> keys) {
    for (auto& k : stft_keys()) keys.push_back(k);
    return keys;
  };
  add_command(app, cmds, "oracle-bench", "oracle upper-bound SDR per mask variant",
              with_stft({{"stems", "", "stem directory (<song>/<source>.wav)", true},
                         {"sources", "", "comma-separated sources (default: all files)"},
                         {"variants", "mixture,ibm,irm:1,irm:inf,cirm:1,cirm:2,cirm:5,cirm:10,cirm:inf",
                          "comma-separated mask variants"},
                         {"mask-eps", "1e-10", "mask denominator epsilon"},
                         {"sdr-eps", "1e-10", "SDR epsilon"},
                         {"aggregation", "global", "global or windowed-median"},
                         {"window-seconds", "1", "window for windowed-median SDR"},
                         {"out", "", "CSV output (source,variant,sdr_db)"},
                         {"out-songs", "", "per-song CSV output"},
                         {"out-table", "", "text table output"},
                         {"seed", "0", "seed (recorded only)"}}));
  add_command(app, cmds, "analyze-masks", "cIRM magnitude and phase statistics",
              with_stft({{"stems", "", "stem directory (<song>/<source>.wav)", true},
                         {"sources", "", "comma-separated sources (default: all files)"},
                         {"floor-db", "-60", "energy floor relative to the mixture peak"},
                         {"max-scatter", "50000", "scatter sample size per source and song"},
                         {"mask-eps", "1e-10", "mask denominator epsilon"},
                         {"seed", "0", "scatter sampling seed"},
                         {"out", "", "JSON-lines statistics output"},
                         {"out-scatter", "", "scatter CSV output"},
                         {"out-svg", "", "scatter SVG output"},
                         {"svg-source", "", "source drawn in the SVG (default vocals)"},
                         {"svg-range", "3", "SVG axis half-range"}}));
  add_command(app, cmds, "train-toy", "seeded training on a synthetic two-source problem",
              {{"out", "", "weights file to write", true},
               {"log", "", "loss log CSV"},
               {"seed", "0", "seed for data and initialisation"},
               {"steps", "200", "optimizer steps"},
               {"lr", "0.003", "base learning rate"},
               {"batch", "2", "batch size"},
               {"train-examples", "400", "synthetic training examples"},
               {"segment-samples", "1024", "samples per example"},
               {"sample-rate", "8000", "sample rate"},
               {"channels", "1", "audio channels"},
               {"window", "128", "STFT window size"},
               {"hop", "32", "STFT hop size"},
               {"widths", "4,8", "encoder widths (one per level)"},
               {"rcbs", "1", "RCBs per residual block"},
               {"icbs", "1", "intermediate blocks"},
               {"heads", "decouple-plus", "mask, decouple or decouple-plus"},
               {"identity-heads", "false", "overwrite the output layer with identity heads"}});
  add_command(app, cmds, "separate", "run a trained model on a mixture",
              {{"weights", "", "weights file", true},
               {"input", "", "mixture wav", true},
               {"output", "", "estimate wav", true},
               {"format", "float32", "float32, pcm16 or pcm24"},
               {"seed", "0", "seed (recorded only)"}});
  add_command(app, cmds, "eval", "global and windowed-median SDR of an estimate",
              {{"reference", "", "reference wav", true},
               {"estimate", "", "estimate wav", true},
               {"window-seconds", "1", "window for windowed-median SDR"},
               {"sdr-eps", "1e-10", "SDR epsilon"},
               {"out", "", "JSON-lines output"},
               {"seed", "0", "seed (recorded only)"}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[invalid_argument]: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    for (const auto& cmd : cmds) {
      if (!cmd->app->parsed()) continue;
      const ResolvedConfig cfg = resolve(*cmd);
      std::cout << report::comment_header(cfg, cmd->name);
      if (cmd->name == "oracle-bench") return oracle_bench(cfg);
      if (cmd->name == "analyze-masks") return analyze_masks(cfg);
      if (cmd->name == "train-toy") return train_toy(cfg);
      if (cmd->name == "separate") return separate(cfg);
      if (cmd->name == "eval") return eval(cfg);
    }
  } catch (const Error& e) {
    std::cerr << "error[" << category_name(e.category()) << "]: " << one_line(e.what()) << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 1;
}
