#include "avdiar/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace avdiar {

Linkage parse_linkage(const std::string& name) {
  if (name == "average") return Linkage::kAverage;
  if (name == "single") return Linkage::kSingle;
  if (name == "complete") return Linkage::kComplete;
  throw Error("unknown linkage '" + name +
              "' (expected average, single, or complete)");
}

const char* to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::kAverage: return "average";
    case Linkage::kSingle: return "single";
    case Linkage::kComplete: return "complete";
  }
  return "average";
}

Config::Config() {
  for (int i = 1; i <= 19; ++i) threshold_grid.push_back(0.05 * i);
}

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& value, const std::string& key, int line) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError(line, "key '" + key + "' needs a number, got '" + value + "'");
  }
  return out;
}

int to_int(const std::string& value, const std::string& key, int line) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError(line, "key '" + key + "' needs an integer, got '" + value + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& value, const std::string& key, int line) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError(line, "key '" + key + "' needs an unsigned integer, got '" +
                               value + "'");
  }
  return out;
}

std::vector<double> to_grid(const std::string& value, const std::string& key,
                            int line) {
  std::vector<double> grid;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw ParseError(line, "key '" + key + "' has an empty list element");
    }
    grid.push_back(to_double(item, key, line));
  }
  if (grid.empty()) {
    throw ParseError(line, "key '" + key + "' needs at least one value");
  }
  return grid;
}

}  // namespace

Config load_config(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line_no, "expected 'key = value', got '" + trim(raw) + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key before '='");
    if (value.empty()) {
      throw ParseError(line_no, "missing value for key '" + key + "'");
    }

    if (key == "sample_rate") cfg.sample_rate = to_int(value, key, line_no);
    else if (key == "window_s") cfg.window_s = to_double(value, key, line_no);
    else if (key == "stride_s") cfg.stride_s = to_double(value, key, line_no);
    else if (key == "spec_hop_ms") cfg.spec_hop_ms = to_double(value, key, line_no);
    else if (key == "spec_win_ms") cfg.spec_win_ms = to_double(value, key, line_no);
    else if (key == "missing_prob") cfg.missing_prob = to_double(value, key, line_no);
    else if (key == "lr") cfg.lr = to_double(value, key, line_no);
    else if (key == "iterations") cfg.iterations = to_int(value, key, line_no);
    else if (key == "batch_size") cfg.batch_size = to_int(value, key, line_no);
    else if (key == "eval_every") cfg.eval_every = to_int(value, key, line_no);
    else if (key == "collar_s") cfg.collar_s = to_double(value, key, line_no);
    else if (key == "c_audio") cfg.c_audio = to_int(value, key, line_no);
    else if (key == "c_face") cfg.c_face = to_int(value, key, line_no);
    else if (key == "h") cfg.h = to_int(value, key, line_no);
    else if (key == "w") cfg.w = to_int(value, key, line_no);
    else if (key == "linkage") cfg.linkage = parse_linkage(value);
    else if (key == "threshold_grid") cfg.threshold_grid = to_grid(value, key, line_no);
    else if (key == "seed") cfg.seed = to_u64(value, key, line_no);
    else if (key == "vad_percentile") cfg.vad_percentile = to_double(value, key, line_no);
    else if (key == "vad_median_frames") cfg.vad_median_frames = to_int(value, key, line_no);
    else if (key == "vad_offset_db") cfg.vad_offset_db = to_double(value, key, line_no);
    else if (key == "vad_min_speech_s") cfg.vad_min_speech_s = to_double(value, key, line_no);
    else if (key == "vad_bridge_gap_s") cfg.vad_bridge_gap_s = to_double(value, key, line_no);
    else throw ParseError(line_no, "unknown config key '" + key + "'");
  }
  validate_config(cfg);
  return cfg;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str());
}

void validate_config(const Config& cfg) {
  auto fail = [](const std::string& msg) { throw Error("config: " + msg); };

  if (cfg.sample_rate <= 0) fail("sample_rate must be positive");
  if (!(cfg.stride_s > 0.0)) fail("stride_s must be positive");
  if (!(cfg.window_s > cfg.stride_s)) fail("window_s must exceed stride_s");
  if (!(cfg.spec_hop_ms > 0.0)) fail("spec_hop_ms must be positive");
  if (!(cfg.spec_win_ms >= cfg.spec_hop_ms)) {
    fail("spec_win_ms must be at least spec_hop_ms");
  }
  if (cfg.missing_prob < 0.0 || cfg.missing_prob > 1.0) {
    fail("missing_prob must lie in [0, 1]");
  }
  if (!(cfg.lr > 0.0)) fail("lr must be positive");
  if (cfg.iterations < 0) fail("iterations must be non-negative");
  if (cfg.batch_size < 2) fail("batch_size must be at least 2");
  if (cfg.eval_every < 1) fail("eval_every must be at least 1");
  if (cfg.collar_s < 0.0) fail("collar_s must be non-negative");
  if (cfg.c_audio < 1) fail("c_audio must be at least 1");
  if (cfg.c_face < 1) fail("c_face must be at least 1");
  if (cfg.h < 1) fail("h must be at least 1");
  if (cfg.w < 1) fail("w must be at least 1");
  if (cfg.threshold_grid.empty()) fail("threshold_grid must be non-empty");
  for (size_t i = 0; i < cfg.threshold_grid.size(); ++i) {
    double t = cfg.threshold_grid[i];
    if (!(t >= 0.0 && t <= 1.0)) {
      fail("threshold_grid values must lie in [0, 1]");
    }
    if (i > 0 && !(cfg.threshold_grid[i - 1] < t)) {
      fail("threshold_grid must be strictly ascending");
    }
  }
  if (cfg.vad_percentile < 0.0 || cfg.vad_percentile > 100.0) {
    fail("vad_percentile must lie in [0, 100]");
  }
  if (cfg.vad_median_frames < 1) fail("vad_median_frames must be at least 1");
  if (cfg.vad_min_speech_s < 0.0) fail("vad_min_speech_s must be non-negative");
  if (cfg.vad_bridge_gap_s < 0.0) fail("vad_bridge_gap_s must be non-negative");
}

}  // namespace avdiar
