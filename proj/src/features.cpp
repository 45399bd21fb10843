#include "avdiar/features.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace avdiar {

static_assert(std::endian::native == std::endian::little,
              "pair-feature files assume a little-endian host");

FeatureMap FeatureMap::zeros(int channels, int height, int width) {
  if (channels < 1 || height < 1 || width < 1) {
    throw Error("feature map dims must be positive");
  }
  FeatureMap map;
  map.channels = channels;
  map.height = height;
  map.width = width;
  map.values.assign(static_cast<size_t>(channels) * height * width, 0.0);
  return map;
}

FeatureMap FeatureMap::broadcast(const std::vector<double>& prototype,
                                 int height, int width) {
  auto map = zeros(static_cast<int>(prototype.size()), height, width);
  for (int c = 0; c < map.channels; ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) map.at(c, y, x) = prototype[c];
    }
  }
  return map;
}

FeatureMap adaptive_pool(const FeatureMap& in, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw Error("adaptive_pool: output dims must be positive");
  if (out_h > in.height || out_w > in.width) {
    throw Error("adaptive_pool: cannot pool " + std::to_string(in.height) + "x" +
                std::to_string(in.width) + " up to " + std::to_string(out_h) +
                "x" + std::to_string(out_w));
  }
  if (out_h == in.height && out_w == in.width) return in;

  auto out = FeatureMap::zeros(in.channels, out_h, out_w);
  for (int c = 0; c < in.channels; ++c) {
    for (int i = 0; i < out_h; ++i) {
      int y0 = i * in.height / out_h;
      int y1 = (i + 1) * in.height / out_h;
      for (int j = 0; j < out_w; ++j) {
        int x0 = j * in.width / out_w;
        int x1 = (j + 1) * in.width / out_w;
        double sum = 0.0;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) sum += in.at(c, y, x);
        }
        out.at(c, i, j) = sum / ((y1 - y0) * (x1 - x0));
      }
    }
  }
  return out;
}

void validate_pair(const AVPairFeatures& pair) {
  if (pair.audio.values.empty()) throw Error("pair has no audio features");
  if (pair.visible != pair.face.has_value()) {
    throw Error("pair visibility flag disagrees with face presence");
  }
}

AVPairFeatures apply_missing_augmentation(const AVPairFeatures& pair, double p,
                                          Rng& rng) {
  if (p < 0.0 || p > 1.0) throw Error("missing probability must lie in [0, 1]");
  AVPairFeatures out = pair;
  if (out.visible && rng.bernoulli(p)) {
    out.face.reset();
    out.visible = false;
  }
  return out;
}

FeatureMap pool_spectrogram(const Spectrogram& spec, int channels, int h, int w) {
  if (spec.num_frames < 1 || spec.num_bins < 1) {
    throw Error("cannot pool an empty spectrogram");
  }
  const int chunks = h * w;
  if (channels > spec.num_bins || chunks > spec.num_frames) {
    throw Error("spectrogram too small to pool into " + std::to_string(channels) +
                " bands x " + std::to_string(chunks) + " chunks");
  }

  auto out = FeatureMap::zeros(channels, h, w);
  for (int c = 0; c < channels; ++c) {
    int b0 = c * spec.num_bins / channels;
    int b1 = (c + 1) * spec.num_bins / channels;
    for (int cell = 0; cell < chunks; ++cell) {
      int f0 = cell * spec.num_frames / chunks;
      int f1 = (cell + 1) * spec.num_frames / chunks;
      double sum = 0.0;
      for (int f = f0; f < f1; ++f) {
        for (int b = b0; b < b1; ++b) sum += spec.at(f, b);
      }
      out.at(c, cell / w, cell % w) = sum / ((f1 - f0) * (b1 - b0));
    }
  }
  return out;
}

SpectrogramStatExtractor::SpectrogramStatExtractor(AudioSignal signal,
                                                   std::string video_id,
                                                   const Config& cfg)
    : signal_(std::move(signal)), video_id_(std::move(video_id)), cfg_(cfg) {}

AVPairFeatures SpectrogramStatExtractor::extract(const std::string& video_id,
                                                 const TimeInterval& segment) {
  if (video_id != video_id_) {
    throw Error("extractor holds audio for '" + video_id_ + "', not '" +
                video_id + "'");
  }
  auto first = static_cast<long long>(std::llround(segment.onset * signal_.sample_rate));
  auto last = static_cast<long long>(std::llround(segment.offset * signal_.sample_rate));
  if (first < 0 || last > static_cast<long long>(signal_.samples.size()) ||
      last <= first) {
    throw Error("segment outside the audio signal");
  }

  AudioSignal slice;
  slice.sample_rate = signal_.sample_rate;
  slice.samples.assign(signal_.samples.begin() + first,
                       signal_.samples.begin() + last);

  AVPairFeatures pair;
  pair.audio = pool_spectrogram(compute_spectrogram(slice, cfg_), cfg_.c_audio,
                                cfg_.h, cfg_.w);
  pair.visible = false;
  pair.segment = segment;
  pair.video_id = video_id;
  return pair;
}

namespace {

constexpr char kMagic[4] = {'A', 'V', 'F', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) {
    throw Error("truncated pair file: " + path);
  }
  return v;
}

void write_map(std::ofstream& out, const FeatureMap& map) {
  for (double v : map.values) {
    float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), 4);
  }
}

FeatureMap read_map(std::ifstream& in, int c, int h, int w,
                    const std::string& path) {
  auto map = FeatureMap::zeros(c, h, w);
  for (double& v : map.values) {
    float f = 0.0f;
    if (!in.read(reinterpret_cast<char*>(&f), 4)) {
      throw Error("truncated pair file: " + path);
    }
    v = f;
  }
  return map;
}

}  // namespace

void save_pair_file(const std::string& path, const AVPairFeatures& pair) {
  validate_pair(pair);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write pair file: " + path);

  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(pair.audio.channels));
  write_u32(out, static_cast<std::uint32_t>(pair.audio.height));
  write_u32(out, static_cast<std::uint32_t>(pair.audio.width));
  const FeatureMap* face = pair.face ? &*pair.face : nullptr;
  write_u32(out, face ? static_cast<std::uint32_t>(face->channels) : 0);
  write_u32(out, face ? static_cast<std::uint32_t>(face->height) : 0);
  write_u32(out, face ? static_cast<std::uint32_t>(face->width) : 0);
  write_u32(out, pair.visible ? 1 : 0);
  write_map(out, pair.audio);
  if (face) write_map(out, *face);
  if (!out) throw Error("failed writing pair file: " + path);
}

AVPairFeatures load_pair_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open pair file: " + path);

  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error("not a pair-feature file: " + path);
  }
  if (read_u32(in, path) != kVersion) {
    throw Error("unsupported pair file version: " + path);
  }
  int ca = static_cast<int>(read_u32(in, path));
  int ha = static_cast<int>(read_u32(in, path));
  int wa = static_cast<int>(read_u32(in, path));
  int cf = static_cast<int>(read_u32(in, path));
  int hf = static_cast<int>(read_u32(in, path));
  int wf = static_cast<int>(read_u32(in, path));
  std::uint32_t visible = read_u32(in, path);

  AVPairFeatures pair;
  pair.audio = read_map(in, ca, ha, wa, path);
  if (cf > 0) pair.face = read_map(in, cf, hf, wf, path);
  pair.visible = visible != 0;
  validate_pair(pair);
  return pair;
}

}  // namespace avdiar
