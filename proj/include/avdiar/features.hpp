#pragma once

#include <optional>
#include <string>
#include <vector>

#include "avdiar/config.hpp"
#include "avdiar/rng.hpp"
#include "avdiar/spectrogram.hpp"
#include "avdiar/types.hpp"

namespace avdiar {

// Dense channels-by-height-by-width tensor, channel-major.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;  // (c * height + y) * width + x

  double& at(int c, int y, int x) {
    return values[(static_cast<size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return values[(static_cast<size_t>(c) * height + y) * width + x];
  }

  static FeatureMap zeros(int channels, int height, int width);
  // Repeats a per-channel prototype vector across every spatial cell.
  static FeatureMap broadcast(const std::vector<double>& prototype, int height,
                              int width);
};

// Mean-pools each channel onto an out_h x out_w grid. Bucket (i, j) covers
// input rows [floor(i*H/out_h), floor((i+1)*H/out_h)) and the analogous
// columns, so pooling to the input size is the identity and the global mean
// is preserved whenever the sizes divide evenly. Upsampling is rejected.
FeatureMap adaptive_pool(const FeatureMap& in, int out_h, int out_w);

// One audio segment paired with at most one face crop.
// Invariants: visible == true iff a face map is present; when a speaker is
// off screen the face is absent and scoring treats its channels as zeros.
struct AVPairFeatures {
  FeatureMap audio;
  std::optional<FeatureMap> face;
  bool visible = false;

  TimeInterval segment;
  std::string video_id;
  std::string true_speaker;  // ground truth where known, "" otherwise
};

void validate_pair(const AVPairFeatures& pair);

// Drops the face with probability p (visible pairs only; invisible pairs pass
// through untouched and consume no randomness). Visibility can only go from
// true to false.
AVPairFeatures apply_missing_augmentation(const AVPairFeatures& pair, double p,
                                          Rng& rng);

// Mean log-power over a channels-band by h-by-w time-frequency grid: channel
// c covers its share of frequency bins, cell (y, x) covers time chunk y*w+x.
FeatureMap pool_spectrogram(const Spectrogram& spec, int channels, int h, int w);

// Produces pair features for an arbitrary time window of one recording.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual AVPairFeatures extract(const std::string& video_id,
                                 const TimeInterval& segment) = 0;
};

// Audio-only features from a waveform: the segment's spectrogram pooled into
// a (c_audio, h, w) grid. Face is absent, visible is false.
class SpectrogramStatExtractor : public FeatureExtractor {
 public:
  SpectrogramStatExtractor(AudioSignal signal, std::string video_id,
                           const Config& cfg);
  AVPairFeatures extract(const std::string& video_id,
                         const TimeInterval& segment) override;

 private:
  AudioSignal signal_;
  std::string video_id_;
  Config cfg_;
};

// Binary pair-feature file: fixed header (dims + visibility) followed by the
// map payloads as little-endian 32-bit floats, audio first, then the face if
// present. Times/ids travel in the corpus manifest, not in this file.
void save_pair_file(const std::string& path, const AVPairFeatures& pair);
AVPairFeatures load_pair_file(const std::string& path);

}  // namespace avdiar
