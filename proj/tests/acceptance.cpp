// End-to-end release gates. Each gate prints one PASS/FAIL line with its
// measured numbers and pinned bounds; the binary exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "avdiar/cli.hpp"
#include "avdiar/cluster.hpp"
#include "avdiar/config.hpp"
#include "avdiar/corpus.hpp"
#include "avdiar/pipeline.hpp"
#include "avdiar/relation.hpp"
#include "avdiar/rng.hpp"
#include "avdiar/rttm.hpp"
#include "avdiar/scoring.hpp"
#include "avdiar/train.hpp"

using namespace avdiar;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Quantizes to the millisecond grid exactly as the RTTM text layer would.
double ms_grid(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", t);
  return std::strtod(buf, nullptr);
}

Diarization make_dia(const std::string& file_id,
                     const std::vector<RttmRecord>& records) {
  return normalize_diarization(records);
}

// ---------------------------------------------------------------------------
// Gate 1: the region scorer agrees with the 1 ms tick oracle.

Diarization random_diarization(Rng& rng, const std::string& file_id,
                               char name_base) {
  std::vector<RttmRecord> records;
  const int n_speakers = 1 + static_cast<int>(rng.below(6));
  for (int s = 0; s < n_speakers; ++s) {
    const std::string name(1, static_cast<char>(name_base + s));
    const int turns = 1 + static_cast<int>(rng.below(3));
    for (int t = 0; t < turns; ++t) {
      const double dur = ms_grid(rng.uniform(0.6, 6.0));
      const double onset = ms_grid(rng.uniform(0.0, 120.0 - dur));
      records.push_back(
          RttmRecord{file_id, 1, TimeInterval{onset, onset + dur}, name});
    }
  }
  return make_dia(file_id, records);
}

std::pair<bool, std::string> gate_der_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  int cases = 0;
  double max_delta = 0.0;
  for (int draw = 0; cases < 50; ++draw) {
    if (draw >= 300) return {false, "could not draw 50 scoreable cases"};
    Rng rng(mix_seed(mix_seed(913, static_cast<std::uint64_t>(draw)),
                     hash_string("acceptance.der")));
    const Diarization ref = random_diarization(rng, "clip", 'A');
    const Diarization hyp = random_diarization(rng, "clip", 'a');
    DerBreakdown fast, slow;
    try {
      fast = compute_der(ref, hyp, 0.25);
    } catch (const Error&) {
      bool slow_throws = false;
      try {
        brute_force_der(ref, hyp, 0.25);
      } catch (const Error&) {
        slow_throws = true;
      }
      if (!slow_throws) return {false, "routes disagree about scoreability"};
      continue;  // collar swallowed everything; not a scoreable case
    }
    slow = brute_force_der(ref, hyp, 0.25);
    for (double delta :
         {fast.missed_pct - slow.missed_pct,
          fast.false_alarm_pct - slow.false_alarm_pct,
          fast.confusion_pct - slow.confusion_pct,
          fast.der_pct - slow.der_pct}) {
      max_delta = std::max(max_delta, std::abs(delta));
    }
    ++cases;
  }
  const double secs = seconds_since(t0);
  const bool pass = max_delta <= 0.1 && secs < 30.0;
  return {pass, fmt("missed/fa/confusion/der within 0.1 pp of the tick oracle "
                    "on %d random diarizations (max delta %.6f pp, %.1f s)",
                    cases, max_delta, secs)};
}

// ---------------------------------------------------------------------------
// Gate 2: two hand-derived scoring cases, collar 0.25 s.

std::pair<bool, std::string> gate_worked_examples() {
  // One hypothesis speaker spans two reference speakers: the unmapped half
  // is pure confusion. Scored 3.0 s, confusion 1.5 s.
  const Diarization ref_conf =
      make_dia("f", {RttmRecord{"f", 1, TimeInterval{0.0, 2.0}, "A"},
                     RttmRecord{"f", 1, TimeInterval{2.0, 4.0}, "B"}});
  const Diarization hyp_conf =
      make_dia("f", {RttmRecord{"f", 1, TimeInterval{0.0, 4.0}, "X"}});
  const DerBreakdown conf = compute_der(ref_conf, hyp_conf, 0.25);

  // The hypothesis overshoots the reference by a collar-trimmed second:
  // scored 1.5 s, false alarm 0.75 s.
  const Diarization ref_fa =
      make_dia("f", {RttmRecord{"f", 1, TimeInterval{0.0, 2.0}, "A"}});
  const Diarization hyp_fa =
      make_dia("f", {RttmRecord{"f", 1, TimeInterval{0.0, 3.0}, "A"}});
  const DerBreakdown fa = compute_der(ref_fa, hyp_fa, 0.25);

  const double tol = 0.1;
  const bool pass = std::abs(conf.missed_pct - 0.0) <= tol &&
                    std::abs(conf.false_alarm_pct - 0.0) <= tol &&
                    std::abs(conf.confusion_pct - 50.0) <= tol &&
                    std::abs(conf.der_pct - 50.0) <= tol &&
                    std::abs(fa.missed_pct - 0.0) <= tol &&
                    std::abs(fa.false_alarm_pct - 50.0) <= tol &&
                    std::abs(fa.confusion_pct - 0.0) <= tol &&
                    std::abs(fa.der_pct - 50.0) <= tol;
  return {pass,
          fmt("worked cases at collar 0.25: confusion-only der %.2f%% "
              "(want 50.00), false-alarm-only der %.2f%% (want 50.00)",
              conf.der_pct, fa.der_pct)};
}

// ---------------------------------------------------------------------------
// Gate 3: analytic gradients vs central finite differences.

FeatureMap random_map(int channels, int h, int w, Rng& rng) {
  FeatureMap map = FeatureMap::zeros(channels, h, w);
  for (double& v : map.values) v = rng.gaussian();
  return map;
}

std::pair<bool, std::string> gate_gradients() {
  Config mcfg;
  mcfg.c_audio = 3;
  mcfg.c_face = 2;
  mcfg.h = 2;
  mcfg.w = 2;
  const double step = 1e-5;
  double worst_rel = 0.0;

  for (int draw = 0; draw < 20; ++draw) {
    RelationModel model;
    std::vector<AVPairFeatures> feats;
    std::vector<BatchItem> batch;
    bool ready = false;
    for (int attempt = 0; attempt < 40 && !ready; ++attempt) {
      Rng rng(mix_seed(mix_seed(517, static_cast<std::uint64_t>(
                                          draw * 64 + attempt)),
                       hash_string("acceptance.grad")));
      model = init_model(mcfg, rng.next());
      for (double& p : model.params) p += 0.05 * rng.gaussian();
      feats.clear();
      feats.reserve(8);
      for (int i = 0; i < 8; ++i) {
        AVPairFeatures pair;
        pair.audio = random_map(mcfg.c_audio, mcfg.h, mcfg.w, rng);
        pair.visible = rng.uniform() < 0.7;
        if (pair.visible) {
          pair.face = random_map(mcfg.c_face, mcfg.h, mcfg.w, rng);
        }
        feats.push_back(std::move(pair));
      }
      batch = {BatchItem{&feats[0], &feats[1], 1.0},
               BatchItem{&feats[2], &feats[3], 0.0},
               BatchItem{&feats[4], &feats[5], 1.0},
               BatchItem{&feats[6], &feats[7], 0.0}};
      // A kink inside the difference stencil would corrupt the numeric
      // estimate, so data near a ReLU zero crossing is redrawn.
      ready = relu_margin(model, batch) > 1e-3;
    }
    if (!ready) return {false, fmt("draw %d: no kink-free batch found", draw)};

    std::vector<double> analytic;
    forward_backward(model, batch, analytic);
    double num_diff = 0.0, num_a = 0.0, num_n = 0.0;
    for (std::size_t i = 0; i < model.params.size(); ++i) {
      const double old = model.params[i];
      model.params[i] = old + step;
      const double up = batch_loss(model, batch);
      model.params[i] = old - step;
      const double down = batch_loss(model, batch);
      model.params[i] = old;
      const double numeric = (up - down) / (2.0 * step);
      num_diff += (analytic[i] - numeric) * (analytic[i] - numeric);
      num_a += analytic[i] * analytic[i];
      num_n += numeric * numeric;
    }
    const double denom = std::max({std::sqrt(num_a), std::sqrt(num_n), 1e-12});
    worst_rel = std::max(worst_rel, std::sqrt(num_diff) / denom);
  }
  return {worst_rel <= 1e-4,
          fmt("analytic vs central-difference (step 1e-5) gradients on 20 "
              "model/batch draws: worst relative error %.3e (bound 1e-4)",
              worst_rel)};
}

// ---------------------------------------------------------------------------
// Gate 4: clustering agrees with a from-scratch merge simulation.

double oracle_linkage(const SimilarityMatrix& sim, const std::vector<int>& a,
                      const std::vector<int>& b, Linkage linkage) {
  double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i : a) {
    for (int j : b) {
      const double v = sim.at(i, j);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  switch (linkage) {
    case Linkage::kAverage:
      return sum / (static_cast<double>(a.size()) * b.size());
    case Linkage::kSingle:
      return hi;
    case Linkage::kComplete:
      return lo;
  }
  return 0.0;
}

std::vector<int> oracle_ahc(const SimilarityMatrix& sim, double threshold,
                            Linkage linkage) {
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < sim.n; ++i) clusters.push_back({i});
  while (clusters.size() > 1) {
    std::size_t bi = 0, bj = 0;
    double best = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double v = oracle_linkage(sim, clusters[i], clusters[j], linkage);
        if (!found || v > best) {
          best = v;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    if (best < threshold) break;
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(),
                        clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  // Clusters stay ordered by smallest member, which is also first-appearance
  // order, so the position is the label.
  std::vector<int> labels(static_cast<std::size_t>(sim.n), -1);
  for (std::size_t pos = 0; pos < clusters.size(); ++pos) {
    for (int member : clusters[pos]) {
      labels[static_cast<std::size_t>(member)] = static_cast<int>(pos);
    }
  }
  return labels;
}

std::pair<bool, std::string> gate_ahc_oracle() {
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(mix_seed(mix_seed(771, static_cast<std::uint64_t>(trial)),
                     hash_string("acceptance.ahc")));
    const int n = 1 + static_cast<int>(rng.below(8));
    SimilarityMatrix sim = SimilarityMatrix::identity(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double v = rng.uniform();
        sim.at(i, j) = v;
        sim.at(j, i) = v;
      }
    }
    const double threshold = rng.uniform(0.1, 0.9);
    for (Linkage linkage :
         {Linkage::kAverage, Linkage::kSingle, Linkage::kComplete}) {
      if (ahc_cluster(sim, threshold, linkage) !=
          oracle_ahc(sim, threshold, linkage)) {
        return {false, fmt("mismatch on matrix %d (n=%d, threshold %.3f, %s)",
                           trial, n, threshold, to_string(linkage))};
      }
      ++checked;
    }
  }
  return {true, fmt("clustering matches the merge-simulation oracle on 200 "
                    "random matrices (n<=8) x 3 linkages (%d runs)",
                    checked)};
}

// ---------------------------------------------------------------------------
// Gates 5-8 share one corpus and two trained models.

struct TrainedWorld {
  SyntheticCorpus train_split, val_split, test_split;
  Config cfg;
  TrainResult half;  // trained with missing_prob 0.5
  double half_der = -1.0;
  double train_eval_secs = 0.0;
  std::string failure;  // non-empty if the build threw
};

const TrainedWorld& trained_world() {
  static const TrainedWorld world = [] {
    TrainedWorld w;
    try {
      CorpusParams params;
      params.n_videos = 25;
      params.min_speakers = 4;
      params.max_speakers = 8;
      params.off_screen_fraction = 0.25;
      params.segs_per_speaker = 3;
      params.noise_sigma = 0.1;
      params.seed = 101;
      const SyntheticCorpus corpus = make_synthetic_corpus(params);
      auto splits = split_corpus(corpus, 12, 3, 10);
      w.train_split = std::move(splits[0]);
      w.val_split = std::move(splits[1]);
      w.test_split = std::move(splits[2]);
      w.cfg.missing_prob = 0.5;
      w.cfg.seed = 7;

      const auto t0 = std::chrono::steady_clock::now();
      w.half = train(w.train_split, w.val_split, w.cfg);
      const DiarizeOptions opts{w.half.threshold, w.cfg.linkage, 1.0, 0.0, 5};
      w.half_der =
          evaluate_corpus(w.test_split, w.half.model, opts, w.cfg).total.der_pct;
      w.train_eval_secs = seconds_since(t0);
    } catch (const std::exception& ex) {
      w.failure = ex.what();
    }
    return w;
  }();
  return world;
}

std::pair<bool, std::string> gate_synthetic_recovery() {
  const TrainedWorld& w = trained_world();
  if (!w.failure.empty()) return {false, "world build failed: " + w.failure};
  const bool pass = w.half_der <= 5.0 && w.train_eval_secs < 300.0;
  return {pass, fmt("10-video test corpus der %.3f%% (bound 5%%) at missing "
                    "rate 0 with oracle regions; train+eval %.0f s "
                    "(bound 300 s)",
                    w.half_der, w.train_eval_secs)};
}

std::pair<bool, std::string> gate_separation_margin() {
  const TrainedWorld& w = trained_world();
  if (!w.failure.empty()) return {false, "world build failed: " + w.failure};
  SyntheticExtractor extractor(w.test_split);
  const DiarizeOptions opts{w.half.threshold, w.cfg.linkage, 1.0, 0.0, 5};
  double sum_same = 0.0, sum_cross = 0.0;
  std::int64_t n_same = 0, n_cross = 0;
  for (const CorpusVideo& video : w.test_split.videos) {
    const WindowedVideo wv = window_video(
        video.id, reference_speech_regions(video.reference), extractor, w.cfg);
    const SimilarityMatrix sim = windows_similarity(wv, w.half.model, opts);
    for (int i = 0; i < sim.n; ++i) {
      for (int j = i + 1; j < sim.n; ++j) {
        const bool same =
            !wv.pairs[static_cast<std::size_t>(i)].true_speaker.empty() &&
            wv.pairs[static_cast<std::size_t>(i)].true_speaker ==
                wv.pairs[static_cast<std::size_t>(j)].true_speaker;
        (same ? sum_same : sum_cross) += sim.at(i, j);
        ++(same ? n_same : n_cross);
      }
    }
  }
  if (n_same == 0 || n_cross == 0) return {false, "degenerate pair census"};
  const double mean_same = sum_same / static_cast<double>(n_same);
  const double mean_cross = sum_cross / static_cast<double>(n_cross);
  const double margin = mean_same - mean_cross;
  return {margin >= 0.3,
          fmt("same-speaker windows score %.3f vs cross %.3f: margin %.3f "
              "(bound 0.3)",
              mean_same, mean_cross, margin)};
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const std::vector<double> rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::pair<bool, std::string> gate_missing_rate_degradation() {
  const TrainedWorld& w = trained_world();
  if (!w.failure.empty()) return {false, "world build failed: " + w.failure};
  const DiarizeOptions opts{w.half.threshold, w.cfg.linkage, 1.0, 0.0, 5};
  const SweepResult sweep = run_sweep(w.test_split, w.half.model, opts, w.cfg);
  std::vector<double> rates, ders;
  for (const SweepRow& row : sweep.rows) {
    rates.push_back(row.missing_rate);
    ders.push_back(row.der_pct);
  }
  const double d0 = ders.front(), d1 = ders.back();
  const double rho = spearman(rates, ders);
  const bool pass = d1 >= d0 && rho >= 0.0;
  return {pass, fmt("der %.2f%% at rate 0.0 -> %.2f%% at rate 1.0, spearman "
                    "%.3f over the 11-point sweep (bounds: endpoint >= start, "
                    "spearman >= 0)",
                    d0, d1, rho)};
}

std::pair<bool, std::string> gate_face_blind_training() {
  const TrainedWorld& w = trained_world();
  if (!w.failure.empty()) return {false, "world build failed: " + w.failure};
  Config cfg = w.cfg;
  cfg.missing_prob = 1.0;  // same corpus, schedule, and seed otherwise
  const TrainResult blind = train(w.train_split, w.val_split, cfg);
  const DiarizeOptions opts{blind.threshold, cfg.linkage, 1.0, 0.0, 5};
  const double blind_der =
      evaluate_corpus(w.test_split, blind.model, opts, cfg).total.der_pct;
  return {blind_der > w.half_der,
          fmt("training without faces: test der %.3f%% vs %.3f%% for the "
              "half-dropout baseline at missing rate 0 (must be strictly "
              "higher)",
              blind_der, w.half_der)};
}

// ---------------------------------------------------------------------------
// Gate 9: byte-identical reruns and RTTM round trips.

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int quiet_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return run_cli(args, out, err);
}

std::pair<bool, std::string> gate_determinism() {
  const fs::path root = fs::temp_directory_path() / "avdiar_acceptance_rerun";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cfg_path = (root / "small.cfg").string();
  {
    std::ofstream out(cfg_path);
    out << "c_audio = 2\nc_face = 2\nh = 2\nw = 2\n"
        << "iterations = 60\neval_every = 30\nbatch_size = 4\n";
  }
  for (const std::string rep : {"a", "b"}) {
    const std::string base = (root / rep).string();
    if (quiet_cli({"generate", "--out", base + "/corpus", "--config", cfg_path,
                   "--videos", "5", "--speakers", "3", "--segs", "2",
                   "--sigma", "0.05", "--seed", "17"}) != 0) {
      return {false, "generate failed on rerun " + rep};
    }
    if (quiet_cli({"train", "--corpus", base + "/corpus", "--config", cfg_path,
                   "--out", base + "/run", "--seed", "5"}) != 0) {
      return {false, "train failed on rerun " + rep};
    }
    if (quiet_cli({"diarize", "--checkpoint", base + "/run/model.ckpt",
                   "--corpus", base + "/corpus/test", "--seed", "9", "--out",
                   base + "/hyp.rttm"}) != 0) {
      return {false, "diarize failed on rerun " + rep};
    }
  }
  for (const std::string rel :
       {"corpus/train/manifest.json", "corpus/train/ref/all.rttm",
        "corpus/val/manifest.json", "corpus/val/ref/all.rttm",
        "corpus/test/manifest.json", "corpus/test/ref/all.rttm",
        "run/model.ckpt", "run/training_log.csv", "hyp.rttm"}) {
    if (slurp(root / "a" / rel) != slurp(root / "b" / rel)) {
      fs::remove_all(root);
      return {false, "rerun differs in " + rel};
    }
  }
  fs::remove_all(root);

  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(mix_seed(mix_seed(303, static_cast<std::uint64_t>(trial)),
                     hash_string("acceptance.rttm")));
    std::vector<RttmRecord> records;
    const int n = 1 + static_cast<int>(rng.below(30));
    for (int k = 0; k < n; ++k) {
      const double onset = ms_grid(rng.uniform(0.0, 500.0));
      const double dur = ms_grid(rng.uniform(0.05, 30.0));
      records.push_back(RttmRecord{
          "file" + std::to_string(rng.below(4)),
          1 + static_cast<int>(rng.below(2)),
          TimeInterval{onset, onset + dur},
          "spk_" + std::to_string(rng.below(9))});
    }
    const std::string text = serialize_rttm(records);
    const RttmParseResult parsed = parse_rttm(text);
    if (parsed.skipped_records != 0) return {false, "round trip skipped rows"};
    if (parsed.records.size() != records.size()) {
      return {false, "round trip changed the record count"};
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      const RttmRecord& a = records[i];
      const RttmRecord& b = parsed.records[i];
      if (a.file_id != b.file_id || a.channel != b.channel ||
          a.speaker != b.speaker || a.interval.onset != b.interval.onset ||
          a.interval.offset != b.interval.offset) {
        return {false, fmt("round trip altered record %zu of set %d", i, trial)};
      }
    }
    if (serialize_rttm(parsed.records) != text) {
      return {false, fmt("serialization is not a fixed point on set %d", trial)};
    }
  }
  return {true, "generate/train/diarize reruns are byte-identical and 100 "
                "random record sets survive parse-serialize round trips"};
}

// ---------------------------------------------------------------------------
// Gate 10: face-only late fusion never hurts on a noiseless corpus.

std::pair<bool, std::string> gate_late_fusion() {
  CorpusParams params;
  params.n_videos = 8;
  params.min_speakers = 2;
  params.max_speakers = 4;
  params.off_screen_fraction = 0.0;  // every face exists and is exact
  params.segs_per_speaker = 2;
  params.noise_sigma = 0.0;
  params.seed = 404;
  const SyntheticCorpus corpus = make_synthetic_corpus(params);
  const auto splits = split_corpus(corpus, 5, 1, 2);

  Config cfg;
  cfg.iterations = 200;  // deliberately undertrained relation scorer
  cfg.eval_every = 100;
  cfg.seed = 11;
  const TrainResult tr = train(splits[0], splits[1], cfg);

  const DiarizeOptions unfused{tr.threshold, cfg.linkage, 1.0, 0.0, 3};
  DiarizeOptions fused = unfused;
  fused.alpha = 0.0;
  const double der_unfused =
      evaluate_corpus(splits[2], tr.model, unfused, cfg).total.der_pct;
  const double der_fused =
      evaluate_corpus(splits[2], tr.model, fused, cfg).total.der_pct;
  return {der_fused <= der_unfused,
          fmt("alpha=0 fusion with exact faces: der %.3f%% <= unfused %.3f%%",
              der_fused, der_unfused)};
}

}  // namespace

int main() {
  struct Gate {
    int id;
    std::pair<bool, std::string> (*run)();
  };
  const std::vector<Gate> gates = {
      {1, gate_der_oracle},        {2, gate_worked_examples},
      {3, gate_gradients},         {4, gate_ahc_oracle},
      {5, gate_synthetic_recovery}, {6, gate_separation_margin},
      {7, gate_missing_rate_degradation}, {8, gate_face_blind_training},
      {9, gate_determinism},       {10, gate_late_fusion},
  };
  int failed = 0;
  for (const Gate& gate : gates) {
    bool pass = false;
    std::string detail;
    try {
      std::tie(pass, detail) = gate.run();
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    std::printf("gate %2d  %s  %s\n", gate.id, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    failed += pass ? 0 : 1;
  }
  if (failed == 0) {
    std::printf("all %zu gates passed\n", gates.size());
    return 0;
  }
  std::printf("%d of %zu gates failed\n", failed, gates.size());
  return 1;
}
