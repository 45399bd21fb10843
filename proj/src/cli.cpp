#include "avdiar/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "avdiar/cluster.hpp"
#include "avdiar/config.hpp"
#include "avdiar/corpus.hpp"
#include "avdiar/pipeline.hpp"
#include "avdiar/rttm.hpp"
#include "avdiar/scoring.hpp"
#include "avdiar/train.hpp"
#include "avdiar/vad.hpp"
#include "avdiar/wav.hpp"

namespace avdiar {

namespace {

namespace fs = std::filesystem;

struct GenerateArgs {
  std::string out_dir;
  std::string config_path;
  int videos = 10;
  int train_videos = -1;
  int val_videos = -1;
  int test_videos = -1;
  int min_speakers = 2;
  int max_speakers = 6;
  double off_screen = 0.25;
  int segs = 3;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

struct TrainArgs {
  std::string corpus_dir;
  std::string config_path;
  std::string out_dir = ".";
  std::string checkpoint_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

struct DiarizeArgs {
  std::string checkpoint_path;
  std::string corpus_dir;
  std::string wav_path;
  std::string ref_path;
  std::string config_path;
  std::string vad = "oracle";
  std::string out_path = "hyp.rttm";
  double missing_rate = 0.0;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

struct ScoreArgs {
  std::string ref_path;
  std::string hyp_path;
  std::string csv_path;
  std::string config_path;
  double collar = -1.0;  // <0: take the config value
};

struct SweepArgs {
  std::string checkpoint_path;
  std::string corpus_dir;
  std::string config_path;
  std::string out_path = "sweep.csv";
  double alpha = 1.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

Config load_cfg(const std::string& config_path) {
  if (config_path.empty()) return Config{};
  return load_config_file(config_path);
}

// Splits explicitly given win over the --videos total; otherwise roughly a
// 60/20/20 split with at least one video per part.
void resolve_split(GenerateArgs& args, bool videos_set, bool any_split_set,
                   bool all_split_set) {
  if (any_split_set) {
    if (!all_split_set) {
      throw CLI::ValidationError(
          "--train-videos/--val-videos/--test-videos must be given together");
    }
    const int total = args.train_videos + args.val_videos + args.test_videos;
    if (videos_set && args.videos != total) {
      throw CLI::ValidationError("--videos disagrees with the split total");
    }
    args.videos = total;
    return;
  }
  if (args.videos < 3) {
    throw CLI::ValidationError("--videos must be at least 3 to split");
  }
  args.val_videos = std::max(1, args.videos / 5);
  args.test_videos = std::max(1, args.videos / 5);
  args.train_videos = args.videos - args.val_videos - args.test_videos;
}

int cmd_generate(const GenerateArgs& args, std::ostream& out) {
  Config cfg = load_cfg(args.config_path);
  CorpusParams params;
  params.n_videos = args.videos;
  params.min_speakers = args.min_speakers;
  params.max_speakers = args.max_speakers;
  params.off_screen_fraction = args.off_screen;
  params.segs_per_speaker = args.segs;
  params.noise_sigma = args.sigma;
  params.seed = args.seed_set ? args.seed : cfg.seed;
  params.c_audio = cfg.c_audio;
  params.c_face = cfg.c_face;
  params.h = cfg.h;
  params.w = cfg.w;

  auto corpus = make_synthetic_corpus(params);
  auto splits = split_corpus(corpus, args.train_videos, args.val_videos,
                             args.test_videos);
  const char* names[3] = {"train", "val", "test"};
  for (int i = 0; i < 3; ++i) {
    const auto dir = (fs::path(args.out_dir) / names[i]).string();
    save_corpus(splits[i], dir);
    out << names[i] << ": " << splits[i].videos.size() << " videos -> " << dir
        << "\n";
  }
  return 0;
}

int cmd_train(const TrainArgs& args, std::ostream& out) {
  Config cfg = load_cfg(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;

  auto corpus_train = load_corpus((fs::path(args.corpus_dir) / "train").string());
  auto corpus_val = load_corpus((fs::path(args.corpus_dir) / "val").string());
  // The model must match the data it trains on; the corpus fixes the dims.
  cfg.c_audio = corpus_train.c_audio;
  cfg.c_face = corpus_train.c_face;
  cfg.h = corpus_train.h;
  cfg.w = corpus_train.w;

  auto result = train(corpus_train, corpus_val, cfg);

  fs::create_directories(args.out_dir);
  const auto ckpt_path = args.checkpoint_path.empty()
                             ? (fs::path(args.out_dir) / "model.ckpt").string()
                             : args.checkpoint_path;
  save_checkpoint(Checkpoint{result.model, result.threshold}, ckpt_path);
  write_training_log_csv(result.training_log,
                         (fs::path(args.out_dir) / "training_log.csv").string());
  export_masks_csv(result.model,
                   (fs::path(args.out_dir) / "masks.csv").string());

  out << "checkpoint: " << ckpt_path << "\n";
  out << "threshold: " << result.threshold << "\n";
  out << "final loss: " << result.training_log.back().second << "\n";
  return 0;
}

std::vector<RttmRecord> diarize_corpus_mode(const DiarizeArgs& args,
                                            const Checkpoint& ckpt,
                                            const Config& cfg,
                                            const DiarizeOptions& opts) {
  auto corpus = load_corpus(args.corpus_dir);
  if (corpus.c_audio != ckpt.model.c_audio ||
      corpus.c_face != ckpt.model.c_face || corpus.h != ckpt.model.h ||
      corpus.w != ckpt.model.w) {
    throw Error("corpus feature dims do not match the checkpoint");
  }
  SyntheticExtractor extractor(corpus);
  std::vector<RttmRecord> records;
  for (const auto& video : corpus.videos) {
    auto hyp = diarize_video(video, extractor, ckpt.model, opts, cfg);
    auto recs = to_records(hyp);
    records.insert(records.end(), recs.begin(), recs.end());
  }
  return records;
}

std::vector<RttmRecord> diarize_wav_mode(const DiarizeArgs& args,
                                         const Checkpoint& ckpt, Config cfg,
                                         const DiarizeOptions& opts) {
  cfg.c_audio = ckpt.model.c_audio;
  cfg.c_face = ckpt.model.c_face;
  cfg.h = ckpt.model.h;
  cfg.w = ckpt.model.w;

  auto signal = read_wav_file(args.wav_path, cfg.sample_rate);
  const std::string file_id = fs::path(args.wav_path).stem().string();

  std::vector<TimeInterval> regions;
  if (args.vad == "energy") {
    regions = energy_vad(signal, cfg);
  } else {
    if (args.ref_path.empty()) {
      throw Error("oracle VAD over a wav file needs --ref");
    }
    auto groups = group_by_file(parse_rttm_file(args.ref_path).records);
    const Diarization* ref = nullptr;
    for (const auto& dia : groups) {
      if (dia.file_id == file_id) ref = &dia;
    }
    if (ref == nullptr && groups.size() == 1) ref = &groups.front();
    if (ref == nullptr) {
      throw Error("no reference records for file '" + file_id + "'");
    }
    regions = reference_speech_regions(*ref);
  }

  SpectrogramStatExtractor extractor(signal, file_id, cfg);
  auto windowed = window_video(file_id, regions, extractor, cfg);
  auto hyp = diarize_windows(windowed, ckpt.model, opts);
  return to_records(hyp);
}

int cmd_diarize(const DiarizeArgs& args, std::ostream& out) {
  Config cfg = load_cfg(args.config_path);
  auto ckpt = load_checkpoint(args.checkpoint_path);

  DiarizeOptions opts;
  opts.threshold = ckpt.threshold;
  opts.linkage = cfg.linkage;
  opts.alpha = args.alpha;
  opts.missing_rate = args.missing_rate;
  opts.seed = args.seed_set ? args.seed : cfg.seed;

  std::vector<RttmRecord> records;
  if (!args.corpus_dir.empty()) {
    records = diarize_corpus_mode(args, ckpt, cfg, opts);
  } else {
    records = diarize_wav_mode(args, ckpt, cfg, opts);
  }
  write_rttm_file(args.out_path, records);
  out << "hypothesis: " << args.out_path << " (" << records.size()
      << " segments)\n";
  return 0;
}

int cmd_score(const ScoreArgs& args, std::ostream& out) {
  Config cfg = load_cfg(args.config_path);
  const double collar = args.collar >= 0.0 ? args.collar : cfg.collar_s;

  auto refs = group_by_file(parse_rttm_file(args.ref_path).records);
  auto hyps = group_by_file(parse_rttm_file(args.hyp_path).records);
  std::map<std::string, const Diarization*> hyp_by_file;
  for (const auto& dia : hyps) hyp_by_file[dia.file_id] = &dia;

  std::set<std::string> ref_ids;
  for (const auto& dia : refs) ref_ids.insert(dia.file_id);
  for (const auto& dia : hyps) {
    if (ref_ids.count(dia.file_id) == 0) {
      throw Error("hypothesis file '" + dia.file_id + "' has no reference");
    }
  }

  std::vector<DerBreakdown> parts;
  for (const auto& ref : refs) {
    Diarization hyp;
    hyp.file_id = ref.file_id;
    if (auto it = hyp_by_file.find(ref.file_id); it != hyp_by_file.end()) {
      hyp = *it->second;
    }
    parts.push_back(compute_der(ref, hyp, collar));
  }
  auto total = aggregate_der(parts);
  out << format_der_report(parts, total);
  if (!args.csv_path.empty()) {
    write_der_csv(args.csv_path, parts, total);
  }
  return 0;
}

int cmd_sweep(const SweepArgs& args, std::ostream& out) {
  Config cfg = load_cfg(args.config_path);
  auto ckpt = load_checkpoint(args.checkpoint_path);
  auto corpus = load_corpus(args.corpus_dir);
  if (corpus.c_audio != ckpt.model.c_audio ||
      corpus.c_face != ckpt.model.c_face || corpus.h != ckpt.model.h ||
      corpus.w != ckpt.model.w) {
    throw Error("corpus feature dims do not match the checkpoint");
  }

  DiarizeOptions opts;
  opts.threshold = ckpt.threshold;
  opts.linkage = cfg.linkage;
  opts.alpha = args.alpha;
  opts.seed = args.seed_set ? args.seed : cfg.seed;

  auto sweep = run_sweep(corpus, ckpt.model, opts, cfg);
  write_sweep_csv(sweep, args.out_path);

  char line[160];
  std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %8s\n", "missing_rate",
                "miss%", "fa%", "conf%", "der%");
  out << line;
  for (const auto& row : sweep.rows) {
    std::snprintf(line, sizeof line, "%-12.1f %8.2f %8.2f %8.2f %8.2f\n",
                  row.missing_rate, row.missed_pct, row.false_alarm_pct,
                  row.confusion_pct, row.der_pct);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-12s %8.2f %8.2f %8.2f %8.2f\n", "average",
                sweep.average.missed_pct, sweep.average.false_alarm_pct,
                sweep.average.confusion_pct, sweep.average.der_pct);
  out << line;
  out << "csv: " << args.out_path << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"audio-visual speaker diarization toolkit", "avdiar"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand(
      "generate", "synthesize a benchmark corpus split into train/val/test");
  generate->add_option("--out", gen.out_dir, "output directory")->required();
  generate->add_option("--config", gen.config_path, "config file");
  auto* videos_opt =
      generate->add_option("--videos", gen.videos, "total video count");
  auto* tr_opt = generate->add_option("--train-videos", gen.train_videos,
                                      "videos in the train split");
  auto* va_opt = generate->add_option("--val-videos", gen.val_videos,
                                      "videos in the val split");
  auto* te_opt = generate->add_option("--test-videos", gen.test_videos,
                                      "videos in the test split");
  generate->add_option("--min-speakers", gen.min_speakers,
                       "minimum speakers per video");
  generate->add_option("--speakers", gen.max_speakers,
                       "maximum speakers per video");
  generate->add_option("--off-screen", gen.off_screen,
                       "fraction of speakers without a face");
  generate->add_option("--segs", gen.segs, "segments per speaker");
  generate->add_option("--sigma", gen.sigma, "feature noise level");
  auto* gen_seed = generate->add_option("--seed", gen.seed, "corpus seed");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand(
      "train", "train a relation scorer on a generated corpus");
  train_cmd
      ->add_option("--corpus", tr.corpus_dir,
                   "corpus root holding train/ and val/")
      ->required();
  train_cmd->add_option("--config", tr.config_path, "config file");
  train_cmd->add_option("--out", tr.out_dir, "output directory");
  train_cmd->add_option("--checkpoint", tr.checkpoint_path,
                        "checkpoint path (default <out>/model.ckpt)");
  auto* tr_seed = train_cmd->add_option("--seed", tr.seed, "training seed");

  DiarizeArgs di;
  auto* diarize = app.add_subcommand(
      "diarize", "run the pipeline and write a hypothesis RTTM");
  diarize->add_option("--checkpoint", di.checkpoint_path, "trained checkpoint")
      ->required();
  auto* di_corpus =
      diarize->add_option("--corpus", di.corpus_dir, "corpus split directory");
  auto* di_wav =
      diarize->add_option("--wav", di.wav_path, "16 kHz mono PCM16 wav file");
  di_corpus->excludes(di_wav);
  diarize->add_option("--ref", di.ref_path,
                      "reference RTTM (oracle VAD in wav mode)");
  diarize->add_option("--vad", di.vad, "speech region source")
      ->check(CLI::IsMember({"energy", "oracle"}));
  diarize->add_option("--config", di.config_path, "config file");
  diarize->add_option("--missing-rate", di.missing_rate,
                      "evaluation-time face dropping probability")
      ->check(CLI::Range(0.0, 1.0));
  diarize->add_option("--alpha", di.alpha, "relation weight in late fusion")
      ->check(CLI::Range(0.0, 1.0));
  diarize->add_option("--out", di.out_path, "hypothesis RTTM path");
  auto* di_seed = diarize->add_option("--seed", di.seed, "augmentation seed");

  ScoreArgs sc;
  auto* score =
      app.add_subcommand("score", "evaluate a hypothesis against a reference");
  score->add_option("--ref", sc.ref_path, "reference RTTM")->required();
  score->add_option("--hyp", sc.hyp_path, "hypothesis RTTM")->required();
  score->add_option("--collar", sc.collar,
                    "no-score margin around reference boundaries (s)");
  score->add_option("--csv", sc.csv_path, "also write the breakdown as CSV");
  score->add_option("--config", sc.config_path, "config file");

  SweepArgs sw;
  auto* sweep = app.add_subcommand(
      "sweep", "evaluate across missing rates 0.0 to 1.0");
  sweep->add_option("--checkpoint", sw.checkpoint_path, "trained checkpoint")
      ->required();
  sweep->add_option("--corpus", sw.corpus_dir, "corpus split directory")
      ->required();
  sweep->add_option("--config", sw.config_path, "config file");
  sweep->add_option("--alpha", sw.alpha, "relation weight in late fusion")
      ->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--out", sw.out_path, "sweep CSV path");
  auto* sw_seed = sweep->add_option("--seed", sw.seed, "augmentation seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  gen.seed_set = gen_seed->count() > 0;
  tr.seed_set = tr_seed->count() > 0;
  di.seed_set = di_seed->count() > 0;
  sw.seed_set = sw_seed->count() > 0;

  try {
    if (generate->parsed()) {
      try {
        resolve_split(gen, videos_opt->count() > 0,
                      tr_opt->count() + va_opt->count() + te_opt->count() > 0,
                      tr_opt->count() > 0 && va_opt->count() > 0 &&
                          te_opt->count() > 0);
      } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
      }
      return cmd_generate(gen, out);
    }
    if (train_cmd->parsed()) return cmd_train(tr, out);
    if (diarize->parsed()) {
      if (di.corpus_dir.empty() && di.wav_path.empty()) {
        err << "usage error: diarize needs --corpus or --wav\n";
        return 1;
      }
      if (!di.corpus_dir.empty() && di.vad == "energy") {
        err << "usage error: --vad energy needs --wav input\n";
        return 1;
      }
      return cmd_diarize(di, out);
    }
    if (score->parsed()) return cmd_score(sc, out);
    if (sweep->parsed()) return cmd_sweep(sw, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "usage error: no subcommand given\n";
  return 1;
}

}  // namespace avdiar
