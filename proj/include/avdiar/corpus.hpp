#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "avdiar/features.hpp"
#include "avdiar/types.hpp"

namespace avdiar {

// Speaker identities are per-video: the same label in two videos is two
// different people. off_screen speakers never contribute a face.
struct SpeakerProfile {
  std::string label;
  bool off_screen = false;
  std::vector<double> audio_prototype;  // unit norm, length c_audio
  std::vector<double> face_prototype;   // unit norm, length c_face
};

struct CorpusSegment {
  TimeInterval interval;
  int speaker = 0;  // index into CorpusVideo::speakers
};

struct CorpusVideo {
  std::string id;
  std::vector<SpeakerProfile> speakers;
  std::vector<CorpusSegment> segments;  // disjoint, sorted, ms-grid times
  std::vector<AVPairFeatures> pairs;    // one realized pair per segment
  Diarization reference;
};

struct SyntheticCorpus {
  std::vector<CorpusVideo> videos;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  int c_audio = 16, c_face = 16, h = 4, w = 4;

  const CorpusVideo* find_video(const std::string& id) const;
};

struct CorpusParams {
  int n_videos = 10;
  int min_speakers = 2;
  int max_speakers = 6;           // per-video count drawn uniformly
  double off_screen_fraction = 0.25;  // round(fraction * n_speakers) hidden
  int segs_per_speaker = 3;
  double noise_sigma = 0.1;
  std::uint64_t seed = 1;
  int c_audio = 16, c_face = 16, h = 4, w = 4;
  double min_dur_s = 1.6, max_dur_s = 3.0;  // segment length range
  double min_gap_s = 0.4, max_gap_s = 0.8;  // silence between segments
  std::string id_prefix = "v";
  int first_index = 0;
};

// Draws per-speaker unit-norm Gaussian prototypes, lays the speakers'
// segments out on a shuffled non-overlapping timeline (millisecond grid),
// and realizes one feature pair per segment as prototype + N(0, sigma^2)
// noise per cell. Fully deterministic in params.seed.
SyntheticCorpus make_synthetic_corpus(const CorpusParams& params);
SyntheticCorpus make_synthetic_corpus(int n_videos, int speakers_per_video,
                                      double off_screen_fraction,
                                      int segs_per_speaker, double noise_sigma,
                                      std::uint64_t seed);

// Partitions the videos into train/val/test by position. Counts must sum to
// at most the corpus size; video sets are pairwise disjoint.
std::array<SyntheticCorpus, 3> split_corpus(const SyntheticCorpus& corpus,
                                            int n_train, int n_val, int n_test);

// On-disk layout of one split directory:
//   manifest.json       prototypes, segments, pair index
//   ref/<video>.rttm    per-video reference
//   ref/all.rttm        all references concatenated
//   pairs/<video>_<k>.feat
// Writing is byte-deterministic for a given corpus.
void save_corpus(const SyntheticCorpus& corpus, const std::string& dir);
SyntheticCorpus load_corpus(const std::string& dir);

// Flattened view over every realized pair of every video.
std::vector<const AVPairFeatures*> corpus_pairs(const SyntheticCorpus& corpus);

// Realizes features for arbitrary windows by sampling the dominant speaker's
// prototypes with window-keyed deterministic noise. Windows that do not
// overlap any corpus segment are rejected.
class SyntheticExtractor : public FeatureExtractor {
 public:
  explicit SyntheticExtractor(const SyntheticCorpus& corpus)
      : corpus_(&corpus) {}
  AVPairFeatures extract(const std::string& video_id,
                         const TimeInterval& segment) override;

 private:
  const SyntheticCorpus* corpus_;
};

}  // namespace avdiar
