#include "avdiar/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "avdiar/rng.hpp"
#include "avdiar/rttm.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace avdiar {

namespace {

// Stream salts so structural draws, pair noise, and window noise never share
// a generator state.
const std::uint64_t kSaltVideo = hash_string("corpus.video");
const std::uint64_t kSaltPair = hash_string("corpus.pair");
const std::uint64_t kSaltWindow = hash_string("corpus.window");

double quantize_ms(double t) { return std::round(t * 1000.0) / 1000.0; }

std::vector<double> unit_prototype(int dim, Rng& rng) {
  std::vector<double> v(static_cast<size_t>(dim));
  for (double& x : v) x = rng.gaussian();
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm < 1e-12) {
    v.assign(static_cast<size_t>(dim), 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

void add_noise(FeatureMap& map, double sigma, Rng& rng) {
  if (sigma <= 0.0) return;
  for (double& v : map.values) v += sigma * rng.gaussian();
}

AVPairFeatures realize_pair(const SyntheticCorpus& corpus,
                            const CorpusVideo& video, int speaker_idx,
                            const TimeInterval& segment, Rng& rng) {
  const auto& speaker = video.speakers[static_cast<size_t>(speaker_idx)];
  AVPairFeatures pair;
  pair.audio = FeatureMap::broadcast(speaker.audio_prototype, corpus.h, corpus.w);
  add_noise(pair.audio, corpus.noise_sigma, rng);
  if (!speaker.off_screen) {
    pair.face = FeatureMap::broadcast(speaker.face_prototype, corpus.h, corpus.w);
    add_noise(*pair.face, corpus.noise_sigma, rng);
    pair.visible = true;
  }
  pair.segment = segment;
  pair.video_id = video.id;
  pair.true_speaker = speaker.label;
  return pair;
}

std::string zero_pad(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

const CorpusVideo* SyntheticCorpus::find_video(const std::string& id) const {
  for (const auto& v : videos) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

SyntheticCorpus make_synthetic_corpus(const CorpusParams& params) {
  if (params.n_videos < 1) throw Error("corpus needs at least one video");
  if (params.min_speakers < 1 || params.max_speakers < params.min_speakers) {
    throw Error("invalid speaker count range");
  }
  if (params.off_screen_fraction < 0.0 || params.off_screen_fraction > 1.0) {
    throw Error("off_screen_fraction must lie in [0, 1]");
  }
  if (params.segs_per_speaker < 1) throw Error("segs_per_speaker must be positive");
  if (params.noise_sigma < 0.0) throw Error("noise_sigma must be non-negative");
  if (!(params.min_dur_s > 0.0) || params.max_dur_s < params.min_dur_s ||
      params.min_gap_s < 0.0 || params.max_gap_s < params.min_gap_s) {
    throw Error("invalid segment duration/gap range");
  }

  SyntheticCorpus corpus;
  corpus.noise_sigma = params.noise_sigma;
  corpus.seed = params.seed;
  corpus.c_audio = params.c_audio;
  corpus.c_face = params.c_face;
  corpus.h = params.h;
  corpus.w = params.w;

  for (int v = 0; v < params.n_videos; ++v) {
    const int video_index = params.first_index + v;
    Rng rng(mix_seed(mix_seed(params.seed, static_cast<std::uint64_t>(video_index)),
                     kSaltVideo));

    CorpusVideo video;
    video.id = params.id_prefix + zero_pad(video_index, 3);

    const int n_speakers = rng.uniform_int(params.min_speakers, params.max_speakers);
    const int n_off = static_cast<int>(
        std::llround(params.off_screen_fraction * n_speakers));

    // Choose the off-screen subset by partial Fisher-Yates shuffle.
    std::vector<int> order(static_cast<size_t>(n_speakers));
    for (int i = 0; i < n_speakers; ++i) order[static_cast<size_t>(i)] = i;
    for (int i = 0; i < n_speakers - 1; ++i) {
      int j = rng.uniform_int(i, n_speakers - 1);
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }

    for (int s = 0; s < n_speakers; ++s) {
      SpeakerProfile speaker;
      speaker.label = "spk" + std::to_string(s);
      speaker.audio_prototype = unit_prototype(params.c_audio, rng);
      speaker.face_prototype = unit_prototype(params.c_face, rng);
      video.speakers.push_back(std::move(speaker));
    }
    for (int k = 0; k < n_off; ++k) {
      video.speakers[static_cast<size_t>(order[static_cast<size_t>(k)])].off_screen =
          true;
    }

    // Shuffled round-robin turn order, then a gapped timeline.
    std::vector<int> turns;
    for (int s = 0; s < n_speakers; ++s) {
      for (int k = 0; k < params.segs_per_speaker; ++k) turns.push_back(s);
    }
    for (size_t i = 0; i + 1 < turns.size(); ++i) {
      size_t j = i + rng.below(turns.size() - i);
      std::swap(turns[i], turns[j]);
    }

    double t = 0.0;
    for (int speaker_idx : turns) {
      double gap = rng.uniform(params.min_gap_s, params.max_gap_s);
      double dur = rng.uniform(params.min_dur_s, params.max_dur_s);
      double onset = quantize_ms(t + gap);
      double offset = quantize_ms(onset + dur);
      video.segments.push_back(CorpusSegment{TimeInterval{onset, offset}, speaker_idx});
      t = offset;
    }

    std::vector<RttmRecord> records;
    for (const auto& seg : video.segments) {
      records.push_back(RttmRecord{video.id, 1, seg.interval,
                                   video.speakers[static_cast<size_t>(seg.speaker)].label});
    }
    video.reference = normalize_diarization(records);

    for (size_t k = 0; k < video.segments.size(); ++k) {
      Rng pair_rng(mix_seed(
          mix_seed(mix_seed(params.seed, static_cast<std::uint64_t>(video_index)),
                   static_cast<std::uint64_t>(k)),
          kSaltPair));
      video.pairs.push_back(realize_pair(corpus, video, video.segments[k].speaker,
                                         video.segments[k].interval, pair_rng));
    }
    corpus.videos.push_back(std::move(video));
  }
  return corpus;
}

SyntheticCorpus make_synthetic_corpus(int n_videos, int speakers_per_video,
                                      double off_screen_fraction,
                                      int segs_per_speaker, double noise_sigma,
                                      std::uint64_t seed) {
  CorpusParams params;
  params.n_videos = n_videos;
  params.min_speakers = speakers_per_video;
  params.max_speakers = speakers_per_video;
  params.off_screen_fraction = off_screen_fraction;
  params.segs_per_speaker = segs_per_speaker;
  params.noise_sigma = noise_sigma;
  params.seed = seed;
  return make_synthetic_corpus(params);
}

std::array<SyntheticCorpus, 3> split_corpus(const SyntheticCorpus& corpus,
                                            int n_train, int n_val, int n_test) {
  if (n_train < 0 || n_val < 0 || n_test < 0 ||
      n_train + n_val + n_test > static_cast<int>(corpus.videos.size())) {
    throw Error("split sizes exceed corpus size");
  }
  std::array<SyntheticCorpus, 3> out;
  int counts[3] = {n_train, n_val, n_test};
  int pos = 0;
  for (int part = 0; part < 3; ++part) {
    out[static_cast<size_t>(part)].noise_sigma = corpus.noise_sigma;
    out[static_cast<size_t>(part)].seed = corpus.seed;
    out[static_cast<size_t>(part)].c_audio = corpus.c_audio;
    out[static_cast<size_t>(part)].c_face = corpus.c_face;
    out[static_cast<size_t>(part)].h = corpus.h;
    out[static_cast<size_t>(part)].w = corpus.w;
    for (int k = 0; k < counts[part]; ++k, ++pos) {
      out[static_cast<size_t>(part)].videos.push_back(
          corpus.videos[static_cast<size_t>(pos)]);
    }
  }
  return out;
}

void save_corpus(const SyntheticCorpus& corpus, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "ref");
  fs::create_directories(fs::path(dir) / "pairs");

  json manifest;
  manifest["format"] = "avdiar-corpus";
  manifest["version"] = 1;
  manifest["seed"] = corpus.seed;
  manifest["noise_sigma"] = corpus.noise_sigma;
  manifest["dims"] = {{"c_audio", corpus.c_audio},
                      {"c_face", corpus.c_face},
                      {"h", corpus.h},
                      {"w", corpus.w}};

  json videos = json::array();
  std::string all_refs;
  for (const auto& video : corpus.videos) {
    json jv;
    jv["id"] = video.id;

    json speakers = json::array();
    for (const auto& speaker : video.speakers) {
      speakers.push_back({{"label", speaker.label},
                          {"off_screen", speaker.off_screen},
                          {"audio_prototype", speaker.audio_prototype},
                          {"face_prototype", speaker.face_prototype}});
    }
    jv["speakers"] = std::move(speakers);

    json segments = json::array();
    for (const auto& seg : video.segments) {
      segments.push_back({{"onset", seg.interval.onset},
                          {"offset", seg.interval.offset},
                          {"speaker", seg.speaker}});
    }
    jv["segments"] = std::move(segments);

    json pairs = json::array();
    for (size_t k = 0; k < video.pairs.size(); ++k) {
      const auto& pair = video.pairs[k];
      std::string file =
          "pairs/" + video.id + "_" + zero_pad(static_cast<int>(k), 4) + ".feat";
      save_pair_file((fs::path(dir) / file).string(), pair);
      pairs.push_back({{"file", file},
                       {"onset", pair.segment.onset},
                       {"offset", pair.segment.offset},
                       {"speaker", pair.true_speaker},
                       {"visible", pair.visible}});
    }
    jv["pairs"] = std::move(pairs);
    videos.push_back(std::move(jv));

    auto ref_text = serialize_rttm(to_records(video.reference));
    std::ofstream ref((fs::path(dir) / "ref" / (video.id + ".rttm")).string(),
                      std::ios::binary);
    if (!ref) throw Error("cannot write reference RTTM for " + video.id);
    ref << ref_text;
    all_refs += ref_text;
  }
  manifest["videos"] = std::move(videos);

  std::ofstream all((fs::path(dir) / "ref" / "all.rttm").string(), std::ios::binary);
  if (!all) throw Error("cannot write combined reference RTTM");
  all << all_refs;

  std::ofstream out((fs::path(dir) / "manifest.json").string(), std::ios::binary);
  if (!out) throw Error("cannot write corpus manifest in " + dir);
  out << manifest.dump(1, '\t') << "\n";
  if (!out) throw Error("failed writing corpus manifest in " + dir);
}

SyntheticCorpus load_corpus(const std::string& dir) {
  std::ifstream in((fs::path(dir) / "manifest.json").string(), std::ios::binary);
  if (!in) throw Error("cannot open corpus manifest in " + dir);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw Error("bad corpus manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("format", "") != "avdiar-corpus") {
    throw Error("not a corpus manifest: " + dir);
  }

  SyntheticCorpus corpus;
  try {
    corpus.seed = manifest.at("seed").get<std::uint64_t>();
    corpus.noise_sigma = manifest.at("noise_sigma").get<double>();
    const auto& dims = manifest.at("dims");
    corpus.c_audio = dims.at("c_audio").get<int>();
    corpus.c_face = dims.at("c_face").get<int>();
    corpus.h = dims.at("h").get<int>();
    corpus.w = dims.at("w").get<int>();

    for (const auto& jv : manifest.at("videos")) {
      CorpusVideo video;
      video.id = jv.at("id").get<std::string>();
      for (const auto& js : jv.at("speakers")) {
        SpeakerProfile speaker;
        speaker.label = js.at("label").get<std::string>();
        speaker.off_screen = js.at("off_screen").get<bool>();
        speaker.audio_prototype = js.at("audio_prototype").get<std::vector<double>>();
        speaker.face_prototype = js.at("face_prototype").get<std::vector<double>>();
        video.speakers.push_back(std::move(speaker));
      }
      for (const auto& js : jv.at("segments")) {
        CorpusSegment seg;
        seg.interval = TimeInterval{js.at("onset").get<double>(),
                                    js.at("offset").get<double>()};
        seg.speaker = js.at("speaker").get<int>();
        if (seg.speaker < 0 ||
            seg.speaker >= static_cast<int>(video.speakers.size())) {
          throw Error("segment speaker index out of range in " + video.id);
        }
        video.segments.push_back(seg);
      }
      for (const auto& jp : jv.at("pairs")) {
        auto pair = load_pair_file(
            (fs::path(dir) / jp.at("file").get<std::string>()).string());
        pair.segment = TimeInterval{jp.at("onset").get<double>(),
                                    jp.at("offset").get<double>()};
        pair.video_id = video.id;
        pair.true_speaker = jp.at("speaker").get<std::string>();
        if (pair.visible != jp.at("visible").get<bool>()) {
          throw Error("pair visibility disagrees with manifest in " + video.id);
        }
        video.pairs.push_back(std::move(pair));
      }

      auto ref = parse_rttm_file((fs::path(dir) / "ref" / (video.id + ".rttm")).string());
      video.reference = normalize_diarization(ref.records);
      corpus.videos.push_back(std::move(video));
    }
  } catch (const json::exception& e) {
    throw Error("bad corpus manifest in " + dir + ": " + e.what());
  }
  return corpus;
}

std::vector<const AVPairFeatures*> corpus_pairs(const SyntheticCorpus& corpus) {
  std::vector<const AVPairFeatures*> out;
  for (const auto& video : corpus.videos) {
    for (const auto& pair : video.pairs) out.push_back(&pair);
  }
  return out;
}

AVPairFeatures SyntheticExtractor::extract(const std::string& video_id,
                                           const TimeInterval& segment) {
  const CorpusVideo* video = nullptr;
  std::uint64_t video_index = 0;
  for (size_t i = 0; i < corpus_->videos.size(); ++i) {
    if (corpus_->videos[i].id == video_id) {
      video = &corpus_->videos[i];
      video_index = static_cast<std::uint64_t>(i);
      break;
    }
  }
  if (video == nullptr) throw Error("unknown video '" + video_id + "'");

  // Dominant speaker: maximum overlap, earliest segment on ties.
  int best = -1;
  double best_overlap = 0.0;
  for (size_t k = 0; k < video->segments.size(); ++k) {
    double ov = video->segments[k].interval.overlap(segment);
    if (ov > best_overlap + kTimeEps) {
      best_overlap = ov;
      best = static_cast<int>(k);
    }
  }
  if (best < 0) {
    throw Error("window [" + std::to_string(segment.onset) + ", " +
                std::to_string(segment.offset) + ") overlaps no speech in '" +
                video_id + "'");
  }

  const auto onset_ms = static_cast<std::uint64_t>(std::llround(segment.onset * 1000.0));
  const auto offset_ms = static_cast<std::uint64_t>(std::llround(segment.offset * 1000.0));
  Rng rng(mix_seed(
      mix_seed(mix_seed(mix_seed(corpus_->seed, video_index), onset_ms),
               offset_ms),
      kSaltWindow));
  return realize_pair(*corpus_, *video,
                      video->segments[static_cast<size_t>(best)].speaker, segment,
                      rng);
}

}  // namespace avdiar
