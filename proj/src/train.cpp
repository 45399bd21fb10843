#include "avdiar/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "avdiar/pipeline.hpp"

namespace avdiar {

namespace {

struct PositiveGroup {
  size_t video = 0;
  std::vector<size_t> pair_indices;  // pairs of one speaker, >= 2 of them
};

std::vector<PositiveGroup> positive_groups(const SyntheticCorpus& corpus) {
  std::vector<PositiveGroup> groups;
  for (size_t v = 0; v < corpus.videos.size(); ++v) {
    const auto& video = corpus.videos[v];
    std::vector<std::vector<size_t>> by_speaker(video.speakers.size());
    for (size_t k = 0; k < video.segments.size(); ++k) {
      by_speaker[static_cast<size_t>(video.segments[k].speaker)].push_back(k);
    }
    for (auto& indices : by_speaker) {
      if (indices.size() >= 2) {
        groups.push_back(PositiveGroup{v, std::move(indices)});
      }
    }
  }
  return groups;
}

}  // namespace

TrainBatch sample_batch(const SyntheticCorpus& corpus, int batch_size,
                        double missing_prob, Rng& rng) {
  if (batch_size < 2) throw Error("batch size must be at least 2");
  if (corpus.videos.size() < 2) {
    throw Error("negative sampling needs at least two videos");
  }
  auto groups = positive_groups(corpus);
  if (groups.empty()) {
    throw Error("positive sampling needs a speaker with two segments");
  }
  for (const auto& video : corpus.videos) {
    if (video.pairs.empty()) throw Error("video without pairs: " + video.id);
  }

  TrainBatch batch;
  batch.storage.reserve(static_cast<size_t>(batch_size) * 2);
  const int n_pos = batch_size / 2;

  auto push_pair = [&](const AVPairFeatures& pair) {
    batch.storage.push_back(apply_missing_augmentation(pair, missing_prob, rng));
  };

  for (int i = 0; i < n_pos; ++i) {
    const auto& group = groups[rng.below(groups.size())];
    const size_t a = rng.below(group.pair_indices.size());
    size_t b = rng.below(group.pair_indices.size() - 1);
    if (b >= a) ++b;
    const auto& video = corpus.videos[group.video];
    push_pair(video.pairs[group.pair_indices[a]]);
    push_pair(video.pairs[group.pair_indices[b]]);
  }
  for (int i = n_pos; i < batch_size; ++i) {
    const size_t v1 = rng.below(corpus.videos.size());
    size_t v2 = rng.below(corpus.videos.size() - 1);
    if (v2 >= v1) ++v2;
    const auto& left = corpus.videos[v1];
    const auto& right = corpus.videos[v2];
    push_pair(left.pairs[rng.below(left.pairs.size())]);
    push_pair(right.pairs[rng.below(right.pairs.size())]);
  }

  for (int i = 0; i < batch_size; ++i) {
    BatchItem item;
    item.left = &batch.storage[static_cast<size_t>(i) * 2];
    item.right = &batch.storage[static_cast<size_t>(i) * 2 + 1];
    item.label = i < n_pos ? 1.0 : 0.0;
    batch.items.push_back(item);
  }
  return batch;
}

TrainResult train(const SyntheticCorpus& corpus_train,
                  const SyntheticCorpus& corpus_val, const Config& cfg) {
  validate_config(cfg);
  std::set<std::string> train_ids;
  for (const auto& video : corpus_train.videos) train_ids.insert(video.id);
  for (const auto& video : corpus_val.videos) {
    if (train_ids.count(video.id) != 0) {
      throw Error("video '" + video.id + "' appears in both train and val");
    }
  }
  if (corpus_val.videos.empty()) throw Error("validation corpus is empty");

  TrainResult result;
  result.model = init_model(cfg, cfg.seed);
  RelationModel model = result.model;

  DiarizeOptions val_opts;
  val_opts.linkage = cfg.linkage;
  val_opts.missing_rate = 0.0;
  val_opts.seed = cfg.seed;

  Rng rng(mix_seed(cfg.seed, hash_string("train.sample")));
  const size_t n_params = model.params.size();
  std::vector<double> grad;
  std::vector<double> m(n_params, 0.0);
  std::vector<double> v(n_params, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  double best_der = std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    auto batch = sample_batch(corpus_train, cfg.batch_size, cfg.missing_prob, rng);
    auto res = forward_backward(model, batch.items, grad);
    result.training_log.emplace_back(iter, res.loss);

    const double bc1 = 1.0 - std::pow(beta1, iter);
    const double bc2 = 1.0 - std::pow(beta2, iter);
    for (size_t p = 0; p < n_params; ++p) {
      m[p] = beta1 * m[p] + (1.0 - beta1) * grad[p];
      v[p] = beta2 * v[p] + (1.0 - beta2) * grad[p] * grad[p];
      model.params[p] -= cfg.lr * (m[p] / bc1) / (std::sqrt(v[p] / bc2) + eps);
    }

    if (iter % cfg.eval_every == 0 || iter == cfg.iterations) {
      auto ders = evaluate_thresholds(corpus_val, model, val_opts,
                                      cfg.threshold_grid, cfg);
      for (size_t t = 0; t < ders.size(); ++t) {
        if (!have_best || ders[t] < best_der) {
          have_best = true;
          best_der = ders[t];
          result.model = model;
          result.threshold = cfg.threshold_grid[t];
        }
      }
    }
  }
  return result;
}

void write_training_log_csv(const std::vector<std::pair<int, double>>& log,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write training log to " + path);
  out << "iteration,loss\n";
  char line[64];
  for (const auto& [iteration, loss] : log) {
    std::snprintf(line, sizeof line, "%d,%.9f\n", iteration, loss);
    out << line;
  }
  if (!out) throw Error("failed writing training log to " + path);
}

}  // namespace avdiar
