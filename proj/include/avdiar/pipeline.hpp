#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "avdiar/cluster.hpp"
#include "avdiar/config.hpp"
#include "avdiar/corpus.hpp"
#include "avdiar/features.hpp"
#include "avdiar/relation.hpp"
#include "avdiar/scoring.hpp"
#include "avdiar/types.hpp"

namespace avdiar {

// Union of all reference speech, merged across speakers into disjoint
// sorted regions (the oracle alternative to running a detector).
std::vector<TimeInterval> reference_speech_regions(const Diarization& ref);

// Cosine similarity of the two face maps, clipped at zero. Zero when either
// map has zero norm.
double face_cosine_score(const FeatureMap& a, const FeatureMap& b);

// Blend of the relation score with a face-only score: alpha is the relation
// weight. The face score participates only when both faces are visible and
// the score exists; otherwise the relation score passes through unchanged.
double fuse_scores(double s_avr, std::optional<double> s_face, double alpha,
                   bool both_visible);

struct DiarizeOptions {
  double threshold = 0.5;
  Linkage linkage = Linkage::kAverage;
  double alpha = 1.0;         // relation weight in late fusion; 1 = no fusion
  double missing_rate = 0.0;  // evaluation-time face dropping probability
  std::uint64_t seed = 1;     // seeds the face dropping, per video
};

// Sliding windows over the speech regions plus one feature pair per window.
struct WindowedVideo {
  std::string video_id;
  std::vector<TimeInterval> windows;
  std::vector<AVPairFeatures> pairs;
};

WindowedVideo window_video(const std::string& video_id,
                           const std::vector<TimeInterval>& speech_regions,
                           FeatureExtractor& extractor, const Config& cfg);

// Similarity over the windows of one video: faces dropped at
// opts.missing_rate (seeded per video id, independent of video order),
// relation scores symmetrized, face cosine fused in where gated.
SimilarityMatrix windows_similarity(const WindowedVideo& video,
                                    const RelationModel& model,
                                    const DiarizeOptions& opts);

// Clusters the windows of one video at opts.threshold and merges them back
// into a hypothesis diarization.
Diarization diarize_windows(const WindowedVideo& video,
                            const RelationModel& model,
                            const DiarizeOptions& opts);

// One synthetic-corpus video end to end, using its reference for the speech
// regions (oracle mode: the hypothesis can only relabel real speech).
Diarization diarize_video(const CorpusVideo& video,
                          SyntheticExtractor& extractor,
                          const RelationModel& model,
                          const DiarizeOptions& opts, const Config& cfg);

struct CorpusEval {
  std::vector<DerBreakdown> per_file;  // corpus video order
  DerBreakdown total;
};

// Diarizes and scores every corpus video against its reference.
CorpusEval evaluate_corpus(const SyntheticCorpus& corpus,
                           const RelationModel& model,
                           const DiarizeOptions& opts, const Config& cfg);

// Corpus DER for each candidate threshold. Windowing, augmentation, and
// similarity matrices do not depend on the threshold, so they are computed
// once per video and reused across the grid.
std::vector<double> evaluate_thresholds(const SyntheticCorpus& corpus,
                                        const RelationModel& model,
                                        const DiarizeOptions& opts,
                                        const std::vector<double>& grid,
                                        const Config& cfg);

struct SweepRow {
  double missing_rate = 0.0;
  double missed_pct = 0.0;
  double false_alarm_pct = 0.0;
  double confusion_pct = 0.0;
  double der_pct = 0.0;
};

// One row per missing rate plus their arithmetic mean. The same seed is used
// at every rate, so a run is reproducible end to end and raising the rate
// only ever drops more faces.
struct SweepResult {
  std::vector<SweepRow> rows;
  SweepRow average;
};

// Evaluates the corpus at missing rates 0.0, 0.1, ..., 1.0 (opts.missing_rate
// is ignored; everything else, including the seed, is held fixed).
SweepResult run_sweep(const SyntheticCorpus& corpus, const RelationModel& model,
                      const DiarizeOptions& opts, const Config& cfg);

// Header row, one row per rate, then an "average" row.
void write_sweep_csv(const SweepResult& sweep, const std::string& path);

}  // namespace avdiar
