#include "avdiar/vad.hpp"

#include <algorithm>
#include <cmath>

namespace avdiar {

namespace {

double percentile(std::vector<double> values, double pct) {
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(rank));
  size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = rank - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

std::vector<TimeInterval> energy_vad(const AudioSignal& signal,
                                     const Config& cfg) {
  const int win = static_cast<int>(
      std::lround(cfg.spec_win_ms * 1e-3 * signal.sample_rate));
  const int hop = static_cast<int>(
      std::lround(cfg.spec_hop_ms * 1e-3 * signal.sample_rate));
  const auto len = static_cast<long long>(signal.samples.size());
  if (win <= 0 || hop <= 0 || len < win) return {};

  const int num_frames = static_cast<int>((len - win) / hop + 1);
  std::vector<double> energy_db(num_frames);
  for (int f = 0; f < num_frames; ++f) {
    const double* x = signal.samples.data() + static_cast<size_t>(f) * hop;
    double e = 0.0;
    for (int n = 0; n < win; ++n) e += x[n] * x[n];
    energy_db[f] = 10.0 * std::log10(e + 1e-12);
  }

  const double threshold =
      percentile(energy_db, cfg.vad_percentile) + cfg.vad_offset_db;
  std::vector<char> active(num_frames);
  for (int f = 0; f < num_frames; ++f) active[f] = energy_db[f] > threshold;

  // Binary median filter, edges padded by replication.
  const int width = cfg.vad_median_frames;
  std::vector<char> smoothed(num_frames);
  for (int f = 0; f < num_frames; ++f) {
    int votes = 0;
    for (int k = -(width / 2); k <= width / 2; ++k) {
      int idx = std::clamp(f + k, 0, num_frames - 1);
      votes += active[idx];
    }
    smoothed[f] = 2 * votes > width;
  }

  const double hop_s = cfg.spec_hop_ms * 1e-3;
  const double win_s = cfg.spec_win_ms * 1e-3;
  std::vector<TimeInterval> intervals;
  for (int f = 0; f < num_frames;) {
    if (!smoothed[f]) {
      ++f;
      continue;
    }
    int start = f;
    while (f < num_frames && smoothed[f]) ++f;
    int last = f - 1;
    TimeInterval iv{start * hop_s, last * hop_s + win_s};
    if (iv.duration() >= cfg.vad_min_speech_s) intervals.push_back(iv);
  }

  // Bridge narrow gaps between surviving intervals.
  std::vector<TimeInterval> bridged;
  for (const auto& iv : intervals) {
    if (!bridged.empty() &&
        iv.onset - bridged.back().offset < cfg.vad_bridge_gap_s) {
      bridged.back().offset = iv.offset;
    } else {
      bridged.push_back(iv);
    }
  }
  return bridged;
}

}  // namespace avdiar
