#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avdiar/error.hpp"

namespace avdiar {

// Cluster-linkage rule used when deciding which groups to merge.
enum class Linkage { kAverage, kSingle, kComplete };

Linkage parse_linkage(const std::string& name);
const char* to_string(Linkage linkage);

// All tunables in one flat struct. Defaults are the published operating
// point of the system, shrunk to feature-map sizes that train on a CPU in
// seconds (c_audio/c_face/h/w control model width only, not behavior).
struct Config {
  int sample_rate = 16000;     // Hz; inputs at other rates are rejected
  double window_s = 2.0;       // sliding scoring window length
  double stride_s = 0.5;       // sliding window step
  double spec_hop_ms = 10.0;   // spectrogram frame hop
  double spec_win_ms = 25.0;   // spectrogram frame length
  double missing_prob = 0.5;   // training-time face dropout probability
  double lr = 5e-4;            // Adam learning rate
  int iterations = 2000;       // training iterations
  int batch_size = 16;         // pairs per training batch
  int eval_every = 500;        // validation cadence during training
  double collar_s = 0.25;      // no-score margin around reference boundaries
  int c_audio = 16;            // audio feature channels
  int c_face = 16;             // face feature channels
  int h = 4;                   // feature map height
  int w = 4;                   // feature map width
  Linkage linkage = Linkage::kAverage;
  std::vector<double> threshold_grid;  // candidate clustering thresholds
  std::uint64_t seed = 1;

  // Energy VAD tuning; the detector thresholds frame energies at
  // (vad_percentile of all frames + vad_offset_db).
  double vad_percentile = 30.0;
  int vad_median_frames = 5;       // binary median filter width
  double vad_offset_db = 6.0;
  double vad_min_speech_s = 0.1;   // shorter detections are dropped
  double vad_bridge_gap_s = 0.2;   // narrower gaps are bridged

  // Channel count of the assembled pair tensor: two sides of [face; audio].
  int mask_dim() const { return 2 * (c_audio + c_face); }

  Config();  // fills threshold_grid with 0.05..0.95 step 0.05
};

// Parses flat "key = value" text. '#' starts a comment, blank lines are
// ignored, unknown keys are rejected, missing keys keep their defaults.
// threshold_grid is a comma-separated list. The result is validated.
Config load_config(const std::string& text);
Config load_config_file(const std::string& path);

// Throws Error naming the offending key on the first violated invariant.
void validate_config(const Config& cfg);

}  // namespace avdiar
