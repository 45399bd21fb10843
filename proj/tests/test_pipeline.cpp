#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "avdiar/pipeline.hpp"
#include "doctest.h"

using namespace avdiar;
namespace fs = std::filesystem;

namespace {

// All faces on screen, no noise: same-speaker windows have identical
// features and face cosine is exactly 1.
SyntheticCorpus clean_corpus(int n_videos, std::uint64_t seed) {
  CorpusParams params;
  params.n_videos = n_videos;
  params.min_speakers = 2;
  params.max_speakers = 3;
  params.off_screen_fraction = 0.0;
  params.segs_per_speaker = 2;
  params.noise_sigma = 0.0;
  params.seed = seed;
  params.c_audio = 4;
  params.c_face = 4;
  params.h = 2;
  params.w = 2;
  return make_synthetic_corpus(params);
}

Config small_config() {
  Config cfg;
  cfg.c_audio = 4;
  cfg.c_face = 4;
  cfg.h = 2;
  cfg.w = 2;
  return cfg;
}

// Fresh model scores everything 0.5, so with alpha=0 the fused similarity
// is driven entirely by the synthetic faces.
DiarizeOptions face_only_options() {
  DiarizeOptions opts;
  opts.alpha = 0.0;
  opts.threshold = 0.99;
  return opts;
}

}  // namespace

TEST_CASE("speech regions merge across speakers") {
  Diarization ref;
  ref.file_id = "v0";
  ref.segments = {{TimeInterval{0.0, 2.0}, "A"},
                  {TimeInterval{1.5, 3.0}, "B"},
                  {TimeInterval{4.0, 5.0}, "A"},
                  {TimeInterval{3.0, 3.5}, "B"}};
  auto regions = reference_speech_regions(ref);
  REQUIRE(regions.size() == 2);
  CHECK(regions[0] == TimeInterval{0.0, 3.5});
  CHECK(regions[1] == TimeInterval{4.0, 5.0});
  CHECK(reference_speech_regions(Diarization{}).empty());
}

TEST_CASE("face cosine score") {
  auto a = FeatureMap::broadcast({1.0, 0.0}, 2, 2);
  auto b = FeatureMap::broadcast({0.0, 1.0}, 2, 2);
  auto c = FeatureMap::broadcast({-1.0, 0.0}, 2, 2);
  CHECK(face_cosine_score(a, a) == doctest::Approx(1.0));
  CHECK(face_cosine_score(a, b) == 0.0);
  CHECK(face_cosine_score(a, c) == 0.0);  // negative cosine clips to zero
  CHECK(face_cosine_score(a, FeatureMap::zeros(2, 2, 2)) == 0.0);
  CHECK_THROWS_AS(face_cosine_score(a, FeatureMap::zeros(3, 2, 2)), Error);
}

TEST_CASE("late fusion arithmetic and gating") {
  CHECK(fuse_scores(0.8, 0.4, 0.5, true) == doctest::Approx(0.6));
  CHECK(fuse_scores(0.8, 0.4, 1.0, true) == 0.8);
  CHECK(fuse_scores(0.8, 0.4, 0.0, true) == 0.4);
  CHECK(fuse_scores(0.8, 0.4, 0.5, false) == 0.8);          // a face is hidden
  CHECK(fuse_scores(0.8, std::nullopt, 0.5, true) == 0.8);  // no face score
  CHECK_THROWS_AS(fuse_scores(0.5, 0.5, 1.5, true), Error);
  CHECK_THROWS_AS(fuse_scores(0.5, 0.5, -0.1, true), Error);
}

TEST_CASE("windowing a video covers its speech regions") {
  auto corpus = clean_corpus(1, 11);
  const auto& video = corpus.videos[0];
  SyntheticExtractor extractor(corpus);
  auto cfg = small_config();
  auto regions = reference_speech_regions(video.reference);
  auto windowed = window_video(video.id, regions, extractor, cfg);

  REQUIRE_FALSE(windowed.windows.empty());
  REQUIRE(windowed.windows.size() == windowed.pairs.size());
  for (size_t i = 0; i < windowed.windows.size(); ++i) {
    const auto& w = windowed.windows[i];
    bool inside = false;
    for (const auto& region : regions) {
      if (region.onset <= w.onset + 1e-9 && w.offset <= region.offset + 1e-9) {
        inside = true;
      }
    }
    CHECK(inside);
    CHECK(windowed.pairs[i].segment == w);
    CHECK(windowed.pairs[i].video_id == video.id);
  }

  double windowed_span = 0.0;
  auto merged = reference_speech_regions(
      segments_to_hypothesis(video.id, windowed.windows,
                             std::vector<int>(windowed.windows.size(), 0)));
  for (const auto& r : merged) windowed_span += r.duration();
  double region_span = 0.0;
  for (const auto& r : regions) region_span += r.duration();
  CHECK(windowed_span == doctest::Approx(region_span).epsilon(1e-9));
}

TEST_CASE("similarity fuses faces and respects missing augmentation") {
  auto corpus = clean_corpus(1, 3);
  const auto& video = corpus.videos[0];
  SyntheticExtractor extractor(corpus);
  auto cfg = small_config();
  auto model = init_model(cfg, 5);  // untrained: every relation score is 0.5
  auto windowed = window_video(
      video.id, reference_speech_regions(video.reference), extractor, cfg);
  REQUIRE(windowed.pairs.size() >= 4);

  SUBCASE("alpha 1 leaves the relation scores alone") {
    DiarizeOptions opts;
    opts.alpha = 1.0;
    auto sim = windows_similarity(windowed, model, opts);
    for (int i = 0; i < sim.n; ++i) {
      for (int j = 0; j < sim.n; ++j) {
        CHECK(sim.at(i, j) == (i == j ? 1.0 : 0.5));
      }
    }
  }
  SUBCASE("alpha 0 on clean data separates speakers by face") {
    auto opts = face_only_options();
    auto sim = windows_similarity(windowed, model, opts);
    for (int i = 0; i < sim.n; ++i) {
      for (int j = i + 1; j < sim.n; ++j) {
        CHECK(sim.at(i, j) == sim.at(j, i));
        if (windowed.pairs[i].true_speaker == windowed.pairs[j].true_speaker) {
          CHECK(sim.at(i, j) == doctest::Approx(1.0));
        } else {
          CHECK(sim.at(i, j) < 0.99);
        }
      }
    }
  }
  SUBCASE("missing rate 1 hides every face from the fusion") {
    auto opts = face_only_options();
    opts.missing_rate = 1.0;
    auto sim = windows_similarity(windowed, model, opts);
    for (int i = 0; i < sim.n; ++i) {
      for (int j = 0; j < sim.n; ++j) {
        CHECK(sim.at(i, j) == (i == j ? 1.0 : 0.5));
      }
    }
  }
  SUBCASE("same options give bitwise identical matrices") {
    auto opts = face_only_options();
    opts.missing_rate = 0.4;
    auto sim1 = windows_similarity(windowed, model, opts);
    auto sim2 = windows_similarity(windowed, model, opts);
    CHECK(sim1.values == sim2.values);
  }
}

TEST_CASE("clean corpus diarizes to zero error with face-only fusion") {
  auto corpus = clean_corpus(2, 21);
  auto cfg = small_config();
  auto model = init_model(cfg, 5);
  auto eval = evaluate_corpus(corpus, model, face_only_options(), cfg);
  CHECK(eval.total.der_pct == 0.0);
  CHECK(eval.total.missed == 0.0);
  CHECK(eval.total.false_alarm == 0.0);
  CHECK(eval.total.confusion == 0.0);
  REQUIRE(eval.per_file.size() == 2);
  CHECK(eval.per_file[0].file_id == corpus.videos[0].id);

  // The hypothesis must reproduce the reference segments exactly: windows
  // tile each segment and only same-speaker windows merge.
  SyntheticExtractor extractor(corpus);
  auto hyp = diarize_video(corpus.videos[0], extractor, model,
                           face_only_options(), cfg);
  CHECK(hyp.segments.size() == corpus.videos[0].reference.segments.size());
}

TEST_CASE("threshold grid evaluation matches per-threshold runs") {
  auto corpus = clean_corpus(2, 31);
  auto cfg = small_config();
  auto model = init_model(cfg, 5);
  auto opts = face_only_options();
  std::vector<double> grid = {0.3, 0.7, 0.99};
  auto ders = evaluate_thresholds(corpus, model, opts, grid, cfg);
  REQUIRE(ders.size() == grid.size());
  for (size_t t = 0; t < grid.size(); ++t) {
    DiarizeOptions at = opts;
    at.threshold = grid[t];
    CHECK(ders[t] == evaluate_corpus(corpus, model, at, cfg).total.der_pct);
  }
  CHECK_THROWS_AS(evaluate_thresholds(corpus, model, opts, {}, cfg), Error);
}

TEST_CASE("missing-rate sweep shape and determinism") {
  auto corpus = clean_corpus(2, 41);
  auto cfg = small_config();
  auto model = init_model(cfg, 5);
  auto opts = face_only_options();
  auto sweep = run_sweep(corpus, model, opts, cfg);

  REQUIRE(sweep.rows.size() == 11);
  for (int k = 0; k <= 10; ++k) {
    CHECK(sweep.rows[k].missing_rate == doctest::Approx(k / 10.0));
  }

  DiarizeOptions zero = opts;
  zero.missing_rate = 0.0;
  auto plain = evaluate_corpus(corpus, model, zero, cfg);
  CHECK(sweep.rows[0].der_pct == plain.total.der_pct);
  CHECK(sweep.rows[0].missed_pct == plain.total.missed_pct);

  double mean = 0.0;
  for (const auto& row : sweep.rows) mean += row.der_pct;
  CHECK(sweep.average.der_pct == doctest::Approx(mean / 11.0).epsilon(1e-12));

  auto again = run_sweep(corpus, model, opts, cfg);
  for (size_t k = 0; k < sweep.rows.size(); ++k) {
    CHECK(sweep.rows[k].der_pct == again.rows[k].der_pct);
  }

  auto path = (fs::temp_directory_path() / "avdiar_sweep_test.csv").string();
  write_sweep_csv(sweep, path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "missing_rate,missed_pct,false_alarm_pct,confusion_pct,der_pct");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 12);
  CHECK(last.rfind("average,", 0) == 0);
  fs::remove(path);
}
