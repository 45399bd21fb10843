#include "avdiar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "avdiar/rng.hpp"
#include "avdiar/windows.hpp"

namespace avdiar {

namespace {

constexpr double kTouchEps = 1e-9;

std::vector<AVPairFeatures> augmented_pairs(const WindowedVideo& video,
                                            const DiarizeOptions& opts) {
  std::vector<AVPairFeatures> pairs = video.pairs;
  if (opts.missing_rate <= 0.0) return pairs;
  Rng rng(mix_seed(mix_seed(opts.seed, hash_string(video.video_id)),
                   hash_string("diarize.missing")));
  for (auto& pair : pairs) {
    pair = apply_missing_augmentation(pair, opts.missing_rate, rng);
  }
  return pairs;
}

}  // namespace

std::vector<TimeInterval> reference_speech_regions(const Diarization& ref) {
  std::vector<TimeInterval> intervals;
  for (const auto& [interval, speaker] : ref.segments) {
    intervals.push_back(interval);
  }
  std::sort(intervals.begin(), intervals.end(),
            [](const TimeInterval& a, const TimeInterval& b) {
              return a.onset < b.onset ||
                     (a.onset == b.onset && a.offset < b.offset);
            });
  std::vector<TimeInterval> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.onset <= merged.back().offset + kTouchEps) {
      merged.back().offset = std::max(merged.back().offset, iv.offset);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

double face_cosine_score(const FeatureMap& a, const FeatureMap& b) {
  if (a.values.size() != b.values.size()) {
    throw Error("face maps differ in size");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::max(0.0, dot / std::sqrt(na * nb));
}

double fuse_scores(double s_avr, std::optional<double> s_face, double alpha,
                   bool both_visible) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error("fusion weight must lie in [0, 1]");
  }
  if (!both_visible || !s_face.has_value()) return s_avr;
  return alpha * s_avr + (1.0 - alpha) * *s_face;
}

WindowedVideo window_video(const std::string& video_id,
                           const std::vector<TimeInterval>& speech_regions,
                           FeatureExtractor& extractor, const Config& cfg) {
  WindowedVideo out;
  out.video_id = video_id;
  for (const auto& region : speech_regions) {
    for (const auto& window : slide_segments(region, cfg)) {
      out.windows.push_back(window);
      out.pairs.push_back(extractor.extract(video_id, window));
    }
  }
  return out;
}

SimilarityMatrix windows_similarity(const WindowedVideo& video,
                                    const RelationModel& model,
                                    const DiarizeOptions& opts) {
  const auto pairs = augmented_pairs(video, opts);
  SimilarityMatrix sim = build_similarity_matrix(pairs, model);
  if (opts.alpha < 1.0) {
    for (int i = 0; i < sim.n; ++i) {
      for (int j = i + 1; j < sim.n; ++j) {
        const bool gated = pairs[i].visible && pairs[j].visible;
        std::optional<double> s_face;
        if (gated) {
          s_face = face_cosine_score(*pairs[i].face, *pairs[j].face);
        }
        const double fused = fuse_scores(sim.at(i, j), s_face, opts.alpha, gated);
        sim.at(i, j) = fused;
        sim.at(j, i) = fused;
      }
    }
  }
  return sim;
}

Diarization diarize_windows(const WindowedVideo& video,
                            const RelationModel& model,
                            const DiarizeOptions& opts) {
  SimilarityMatrix sim = windows_similarity(video, model, opts);
  auto labels = ahc_cluster(sim, opts.threshold, opts.linkage);
  return segments_to_hypothesis(video.video_id, video.windows, labels);
}

Diarization diarize_video(const CorpusVideo& video,
                          SyntheticExtractor& extractor,
                          const RelationModel& model,
                          const DiarizeOptions& opts, const Config& cfg) {
  auto regions = reference_speech_regions(video.reference);
  auto windowed = window_video(video.id, regions, extractor, cfg);
  return diarize_windows(windowed, model, opts);
}

CorpusEval evaluate_corpus(const SyntheticCorpus& corpus,
                           const RelationModel& model,
                           const DiarizeOptions& opts, const Config& cfg) {
  SyntheticExtractor extractor(corpus);
  CorpusEval eval;
  for (const auto& video : corpus.videos) {
    auto hyp = diarize_video(video, extractor, model, opts, cfg);
    eval.per_file.push_back(compute_der(video.reference, hyp, cfg.collar_s));
  }
  eval.total = aggregate_der(eval.per_file);
  return eval;
}

std::vector<double> evaluate_thresholds(const SyntheticCorpus& corpus,
                                        const RelationModel& model,
                                        const DiarizeOptions& opts,
                                        const std::vector<double>& grid,
                                        const Config& cfg) {
  if (grid.empty()) throw Error("threshold grid is empty");
  SyntheticExtractor extractor(corpus);
  std::vector<WindowedVideo> windowed;
  std::vector<SimilarityMatrix> sims;
  for (const auto& video : corpus.videos) {
    auto regions = reference_speech_regions(video.reference);
    windowed.push_back(window_video(video.id, regions, extractor, cfg));
    sims.push_back(windows_similarity(windowed.back(), model, opts));
  }

  std::vector<double> ders;
  for (double threshold : grid) {
    std::vector<DerBreakdown> per_file;
    for (size_t i = 0; i < windowed.size(); ++i) {
      auto labels = ahc_cluster(sims[i], threshold, opts.linkage);
      auto hyp = segments_to_hypothesis(windowed[i].video_id,
                                        windowed[i].windows, labels);
      per_file.push_back(
          compute_der(corpus.videos[i].reference, hyp, cfg.collar_s));
    }
    ders.push_back(aggregate_der(per_file).der_pct);
  }
  return ders;
}

SweepResult run_sweep(const SyntheticCorpus& corpus, const RelationModel& model,
                      const DiarizeOptions& opts, const Config& cfg) {
  SweepResult sweep;
  for (int step = 0; step <= 10; ++step) {
    DiarizeOptions rate_opts = opts;
    rate_opts.missing_rate = static_cast<double>(step) / 10.0;
    auto eval = evaluate_corpus(corpus, model, rate_opts, cfg);
    SweepRow row;
    row.missing_rate = rate_opts.missing_rate;
    row.missed_pct = eval.total.missed_pct;
    row.false_alarm_pct = eval.total.false_alarm_pct;
    row.confusion_pct = eval.total.confusion_pct;
    row.der_pct = eval.total.der_pct;
    sweep.rows.push_back(row);
  }
  auto& avg = sweep.average;
  for (const auto& row : sweep.rows) {
    avg.missed_pct += row.missed_pct;
    avg.false_alarm_pct += row.false_alarm_pct;
    avg.confusion_pct += row.confusion_pct;
    avg.der_pct += row.der_pct;
  }
  const double n = static_cast<double>(sweep.rows.size());
  avg.missed_pct /= n;
  avg.false_alarm_pct /= n;
  avg.confusion_pct /= n;
  avg.der_pct /= n;
  return sweep;
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write sweep to " + path);
  out << "missing_rate,missed_pct,false_alarm_pct,confusion_pct,der_pct\n";
  char line[160];
  for (const auto& row : sweep.rows) {
    std::snprintf(line, sizeof line, "%.1f,%.6f,%.6f,%.6f,%.6f\n",
                  row.missing_rate, row.missed_pct, row.false_alarm_pct,
                  row.confusion_pct, row.der_pct);
    out << line;
  }
  std::snprintf(line, sizeof line, "average,%.6f,%.6f,%.6f,%.6f\n",
                sweep.average.missed_pct, sweep.average.false_alarm_pct,
                sweep.average.confusion_pct, sweep.average.der_pct);
  out << line;
  if (!out) throw Error("failed writing sweep to " + path);
}

}  // namespace avdiar
