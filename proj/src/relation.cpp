#include "avdiar/relation.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "avdiar/rng.hpp"

namespace avdiar {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

// Activations in (y, x, channel) order so the innermost loops run over a
// contiguous channel axis.
struct Tensor {
  int h = 0, w = 0, c = 0;
  std::vector<double> values;

  static Tensor zeros(int h, int w, int c) {
    Tensor t;
    t.h = h;
    t.w = w;
    t.c = c;
    t.values.assign(static_cast<size_t>(h) * w * c, 0.0);
    return t;
  }
  double* cell(int y, int x) { return &values[(static_cast<size_t>(y) * w + x) * c]; }
  const double* cell(int y, int x) const {
    return &values[(static_cast<size_t>(y) * w + x) * c];
  }
};

Tensor to_hwc(const FeatureMap& map) {
  auto t = Tensor::zeros(map.height, map.width, map.channels);
  for (int ch = 0; ch < map.channels; ++ch) {
    for (int y = 0; y < map.height; ++y) {
      for (int x = 0; x < map.width; ++x) t.cell(y, x)[ch] = map.at(ch, y, x);
    }
  }
  return t;
}

// 3x3 same-padding convolution, C channels in and out.
// weights[((ky * 3 + kx) * C + ci) * C + co]
void conv3x3(const Tensor& in, const double* weights, const double* bias,
             Tensor& out) {
  const int H = in.h, W = in.w, C = in.c;
  out = Tensor::zeros(H, W, C);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double* o = out.cell(y, x);
      for (int co = 0; co < C; ++co) o[co] = bias[co];
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        if (sy < 0 || sy >= H) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = x + kx - 1;
          if (sx < 0 || sx >= W) continue;
          const double* src = in.cell(sy, sx);
          const double* tap = weights + (static_cast<size_t>(ky * 3 + kx) * C) * C;
          for (int ci = 0; ci < C; ++ci) {
            const double a = src[ci];
            const double* wrow = tap + static_cast<size_t>(ci) * C;
            for (int co = 0; co < C; ++co) o[co] += a * wrow[co];
          }
        }
      }
    }
  }
}

// Accumulates input, weight, and bias gradients for conv3x3.
void conv3x3_backward(const Tensor& in, const double* weights, const Tensor& dout,
                      Tensor& din, double* dweights, double* dbias) {
  const int H = in.h, W = in.w, C = in.c;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double* go = dout.cell(y, x);
      for (int co = 0; co < C; ++co) dbias[co] += go[co];
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        if (sy < 0 || sy >= H) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = x + kx - 1;
          if (sx < 0 || sx >= W) continue;
          const double* src = in.cell(sy, sx);
          double* gi = din.cell(sy, sx);
          const double* tap = weights + (static_cast<size_t>(ky * 3 + kx) * C) * C;
          double* gtap = dweights + (static_cast<size_t>(ky * 3 + kx) * C) * C;
          for (int ci = 0; ci < C; ++ci) {
            const double a = src[ci];
            const double* wrow = tap + static_cast<size_t>(ci) * C;
            double* gwrow = gtap + static_cast<size_t>(ci) * C;
            double acc = 0.0;
            for (int co = 0; co < C; ++co) {
              acc += go[co] * wrow[co];
              gwrow[co] += a * go[co];
            }
            gi[ci] += acc;
          }
        }
      }
    }
  }
}

void relu_inplace(Tensor& t, double* margin) {
  for (double& v : t.values) {
    if (margin != nullptr) *margin = std::min(*margin, std::abs(v));
    if (v < 0.0) v = 0.0;
  }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct PairCache {
  FeatureMap raw;  // pre-mask assembly, for mask gradients
  int vcase = 0;
  Tensor x;        // masked input
  Tensor h1, y1;   // block 1: inner activation and output
  Tensor h2, y2;   // block 2
  std::vector<double> g;
  double z = 0.0;
  double score = 0.0;
};

// y = relu(x + conv2(relu(conv1(x))))
void block_forward(const Tensor& x, const double* w1, const double* b1,
                   const double* w2, const double* b2, Tensor& h, Tensor& y,
                   double* margin) {
  conv3x3(x, w1, b1, h);
  relu_inplace(h, margin);
  conv3x3(h, w2, b2, y);
  for (size_t i = 0; i < y.values.size(); ++i) y.values[i] += x.values[i];
  relu_inplace(y, margin);
}

void block_backward(const Tensor& x, const Tensor& h, const Tensor& y,
                    const Tensor& dy, const double* w1, const double* w2,
                    Tensor& dx, double* dw1, double* db1, double* dw2,
                    double* db2) {
  Tensor dsum = Tensor::zeros(y.h, y.w, y.c);
  for (size_t i = 0; i < y.values.size(); ++i) {
    dsum.values[i] = y.values[i] > 0.0 ? dy.values[i] : 0.0;
  }
  for (size_t i = 0; i < dsum.values.size(); ++i) dx.values[i] += dsum.values[i];

  Tensor dh = Tensor::zeros(h.h, h.w, h.c);
  conv3x3_backward(h, w2, dsum, dh, dw2, db2);
  for (size_t i = 0; i < dh.values.size(); ++i) {
    if (h.values[i] <= 0.0) dh.values[i] = 0.0;
  }
  conv3x3_backward(x, w1, dh, dx, dw1, db1);
}

PairCache forward_pair(const RelationModel& model, const AVPairFeatures& left,
                       const AVPairFeatures& right, double* margin) {
  const auto layout = model.layout();
  const double* p = model.params.data();
  const int D = model.dim();

  PairCache cache;
  cache.raw = assemble_raw_input(model, left, right);
  cache.vcase = visibility_case(left.visible, right.visible);

  FeatureMap masked = cache.raw;
  const double* mask = p + layout.masks + static_cast<size_t>(cache.vcase) * D;
  for (int ch = 0; ch < D; ++ch) {
    for (int y = 0; y < masked.height; ++y) {
      for (int x = 0; x < masked.width; ++x) masked.at(ch, y, x) *= mask[ch];
    }
  }
  cache.x = to_hwc(masked);

  block_forward(cache.x, p + layout.conv1_w[0], p + layout.conv1_b[0],
                p + layout.conv2_w[0], p + layout.conv2_b[0], cache.h1, cache.y1,
                margin);
  block_forward(cache.y1, p + layout.conv1_w[1], p + layout.conv1_b[1],
                p + layout.conv2_w[1], p + layout.conv2_b[1], cache.h2, cache.y2,
                margin);

  const double inv_cells = 1.0 / (static_cast<double>(model.h) * model.w);
  cache.g.assign(static_cast<size_t>(D), 0.0);
  for (int y = 0; y < model.h; ++y) {
    for (int x = 0; x < model.w; ++x) {
      const double* cell = cache.y2.cell(y, x);
      for (int ch = 0; ch < D; ++ch) cache.g[static_cast<size_t>(ch)] += cell[ch];
    }
  }
  for (double& v : cache.g) v *= inv_cells;

  const double* head_w = p + layout.head_w;
  double z = p[layout.head_b];
  for (int ch = 0; ch < D; ++ch) z += head_w[ch] * cache.g[static_cast<size_t>(ch)];
  cache.z = z;
  cache.score = sigmoid(z);
  return cache;
}

void backward_pair(const RelationModel& model, const PairCache& cache,
                   double dscore, std::vector<double>& grad) {
  const auto layout = model.layout();
  const double* p = model.params.data();
  double* g = grad.data();
  const int D = model.dim();

  const double dz = dscore * cache.score * (1.0 - cache.score);
  if (dz == 0.0) return;

  g[layout.head_b] += dz;
  std::vector<double> dg(static_cast<size_t>(D));
  for (int ch = 0; ch < D; ++ch) {
    g[layout.head_w + static_cast<size_t>(ch)] += dz * cache.g[static_cast<size_t>(ch)];
    dg[static_cast<size_t>(ch)] = dz * p[layout.head_w + static_cast<size_t>(ch)];
  }

  const double inv_cells = 1.0 / (static_cast<double>(model.h) * model.w);
  Tensor dy2 = Tensor::zeros(model.h, model.w, D);
  for (int y = 0; y < model.h; ++y) {
    for (int x = 0; x < model.w; ++x) {
      double* cell = dy2.cell(y, x);
      for (int ch = 0; ch < D; ++ch) cell[ch] = dg[static_cast<size_t>(ch)] * inv_cells;
    }
  }

  Tensor dy1 = Tensor::zeros(model.h, model.w, D);
  block_backward(cache.y1, cache.h2, cache.y2, dy2, p + layout.conv1_w[1],
                 p + layout.conv2_w[1], dy1, g + layout.conv1_w[1],
                 g + layout.conv1_b[1], g + layout.conv2_w[1], g + layout.conv2_b[1]);

  Tensor dx = Tensor::zeros(model.h, model.w, D);
  block_backward(cache.x, cache.h1, cache.y1, dy1, p + layout.conv1_w[0],
                 p + layout.conv2_w[0], dx, g + layout.conv1_w[0],
                 g + layout.conv1_b[0], g + layout.conv2_w[0], g + layout.conv2_b[0]);

  // x = raw * mask, so only this pair's visibility case receives gradient.
  double* gmask = g + layout.masks + static_cast<size_t>(cache.vcase) * D;
  for (int y = 0; y < model.h; ++y) {
    for (int x = 0; x < model.w; ++x) {
      const double* cell = dx.cell(y, x);
      for (int ch = 0; ch < D; ++ch) {
        gmask[ch] += cell[ch] * cache.raw.at(ch, y, x);
      }
    }
  }
}

FeatureMap pooled_to(const FeatureMap& map, int h, int w) {
  if (map.height == h && map.width == w) return map;
  return adaptive_pool(map, h, w);
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

constexpr char kMagic[8] = {'A', 'V', 'D', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

ParamLayout make_layout(int dim) {
  if (dim < 1) throw Error("model channel count must be positive");
  const auto d = static_cast<size_t>(dim);
  ParamLayout layout;
  layout.dim = dim;
  size_t offset = 0;
  layout.masks = offset;
  offset += 4 * d;
  for (int block = 0; block < 2; ++block) {
    layout.conv1_w[block] = offset;
    offset += 9 * d * d;
    layout.conv1_b[block] = offset;
    offset += d;
    layout.conv2_w[block] = offset;
    offset += 9 * d * d;
    layout.conv2_b[block] = offset;
    offset += d;
  }
  layout.head_w = offset;
  offset += d;
  layout.head_b = offset;
  offset += 1;
  layout.total = offset;
  return layout;
}

RelationModel init_model(const Config& cfg, std::uint64_t seed) {
  RelationModel model;
  model.c_audio = cfg.c_audio;
  model.c_face = cfg.c_face;
  model.h = cfg.h;
  model.w = cfg.w;

  const auto layout = model.layout();
  model.params.assign(layout.total, 0.0);
  for (int ch = 0; ch < 4 * layout.dim; ++ch) {
    model.params[layout.masks + static_cast<size_t>(ch)] = 1.0;
  }

  Rng rng(mix_seed(seed, hash_string("relation.init")));
  const double std = std::sqrt(2.0 / (9.0 * layout.dim));
  const size_t conv_size = 9 * static_cast<size_t>(layout.dim) * layout.dim;
  for (int block = 0; block < 2; ++block) {
    for (size_t offset : {layout.conv1_w[block], layout.conv2_w[block]}) {
      for (size_t i = 0; i < conv_size; ++i) {
        model.params[offset + i] = std * rng.gaussian();
      }
    }
  }
  return model;
}

int visibility_case(bool left_visible, bool right_visible) {
  return (left_visible ? 2 : 0) + (right_visible ? 1 : 0);
}

FeatureMap assemble_raw_input(const RelationModel& model,
                              const AVPairFeatures& left,
                              const AVPairFeatures& right) {
  validate_pair(left);
  validate_pair(right);
  for (const auto* pair : {&left, &right}) {
    if (pair->audio.channels != model.c_audio) {
      throw Error("audio channel count " + std::to_string(pair->audio.channels) +
                  " does not match the model's " + std::to_string(model.c_audio));
    }
    if (pair->face && pair->face->channels != model.c_face) {
      throw Error("face channel count " + std::to_string(pair->face->channels) +
                  " does not match the model's " + std::to_string(model.c_face));
    }
  }

  auto out = FeatureMap::zeros(model.dim(), model.h, model.w);
  auto copy_block = [&](const FeatureMap& src, int channel_offset) {
    auto pooled = pooled_to(src, model.h, model.w);
    for (int ch = 0; ch < pooled.channels; ++ch) {
      for (int y = 0; y < model.h; ++y) {
        for (int x = 0; x < model.w; ++x) {
          out.at(channel_offset + ch, y, x) = pooled.at(ch, y, x);
        }
      }
    }
  };
  if (left.face) copy_block(*left.face, 0);
  copy_block(left.audio, model.c_face);
  if (right.face) copy_block(*right.face, model.c_face + model.c_audio);
  copy_block(right.audio, 2 * model.c_face + model.c_audio);
  return out;
}

FeatureMap assemble_input(const RelationModel& model, const AVPairFeatures& left,
                          const AVPairFeatures& right) {
  auto map = assemble_raw_input(model, left, right);
  const auto layout = model.layout();
  const int vcase = visibility_case(left.visible, right.visible);
  const double* mask =
      model.params.data() + layout.masks + static_cast<size_t>(vcase) * model.dim();
  for (int ch = 0; ch < map.channels; ++ch) {
    for (int y = 0; y < map.height; ++y) {
      for (int x = 0; x < map.width; ++x) map.at(ch, y, x) *= mask[ch];
    }
  }
  return map;
}

double score_pair(const RelationModel& model, const AVPairFeatures& left,
                  const AVPairFeatures& right) {
  return forward_pair(model, left, right, nullptr).score;
}

double batch_loss(const RelationModel& model, const std::vector<BatchItem>& batch) {
  if (batch.empty()) throw Error("cannot score an empty batch");
  double loss = 0.0;
  for (const auto& item : batch) {
    double s = score_pair(model, *item.left, *item.right);
    loss += (s - item.label) * (s - item.label);
  }
  return loss / static_cast<double>(batch.size());
}

BatchResult forward_backward(const RelationModel& model,
                             const std::vector<BatchItem>& batch,
                             std::vector<double>& grad) {
  if (batch.empty()) throw Error("cannot score an empty batch");
  const auto layout = model.layout();
  grad.assign(layout.total, 0.0);

  BatchResult result;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& item : batch) {
    auto cache = forward_pair(model, *item.left, *item.right, nullptr);
    result.scores.push_back(cache.score);
    const double err = cache.score - item.label;
    result.loss += err * err * inv_n;
    backward_pair(model, cache, 2.0 * err * inv_n, grad);
  }
  return result;
}

double relu_margin(const RelationModel& model, const std::vector<BatchItem>& batch) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& item : batch) {
    forward_pair(model, *item.left, *item.right, &margin);
  }
  return margin;
}

void export_masks_csv(const RelationModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write mask table to " + path);
  const auto layout = model.layout();
  char buf[64];
  for (int vcase = 0; vcase < 4; ++vcase) {
    for (int ch = 0; ch < layout.dim; ++ch) {
      double v = model.params[layout.masks + static_cast<size_t>(vcase) * layout.dim +
                              static_cast<size_t>(ch)];
      std::snprintf(buf, sizeof buf, "%.6f", v);
      out << (ch == 0 ? "" : ",") << buf;
    }
    out << "\n";
  }
  if (!out) throw Error("failed writing mask table to " + path);
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const auto layout = ckpt.model.layout();
  if (ckpt.model.params.size() != layout.total) {
    throw Error("model parameter vector has the wrong size");
  }
  if (!std::isfinite(ckpt.threshold) || ckpt.threshold < 0.0 ||
      ckpt.threshold > 1.0) {
    throw Error("checkpoint threshold must lie in [0, 1]");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint to " + path);
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(ckpt.model.c_audio));
  write_u32(out, static_cast<std::uint32_t>(ckpt.model.c_face));
  write_u32(out, static_cast<std::uint32_t>(ckpt.model.h));
  write_u32(out, static_cast<std::uint32_t>(ckpt.model.w));
  out.write(reinterpret_cast<const char*>(&ckpt.threshold), sizeof ckpt.threshold);
  const auto count = static_cast<std::uint64_t>(ckpt.model.params.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(ckpt.model.params.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw Error("failed writing checkpoint to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw Error("not a model checkpoint: " + path);
  }
  const auto version = read_u32(in);
  if (version != kVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint ckpt;
  ckpt.model.c_audio = static_cast<int>(read_u32(in));
  ckpt.model.c_face = static_cast<int>(read_u32(in));
  ckpt.model.h = static_cast<int>(read_u32(in));
  ckpt.model.w = static_cast<int>(read_u32(in));
  in.read(reinterpret_cast<char*>(&ckpt.threshold), sizeof ckpt.threshold);
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in) throw Error("truncated checkpoint: " + path);
  if (ckpt.model.c_audio < 1 || ckpt.model.c_face < 0 || ckpt.model.h < 1 ||
      ckpt.model.w < 1) {
    throw Error("checkpoint has invalid model dimensions");
  }
  const auto layout = ckpt.model.layout();
  if (count != layout.total) {
    throw Error("checkpoint parameter count does not match its dimensions");
  }
  if (!std::isfinite(ckpt.threshold) || ckpt.threshold < 0.0 ||
      ckpt.threshold > 1.0) {
    throw Error("checkpoint threshold must lie in [0, 1]");
  }
  ckpt.model.params.resize(count);
  in.read(reinterpret_cast<char*>(ckpt.model.params.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw Error("truncated checkpoint: " + path);
  return ckpt;
}

}  // namespace avdiar
