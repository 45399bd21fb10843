#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "avdiar/config.hpp"
#include "avdiar/corpus.hpp"
#include "avdiar/relation.hpp"
#include "avdiar/rng.hpp"

namespace avdiar {

// One sampled training batch. The items point into storage, which owns the
// (possibly face-dropped) copies of the corpus pairs.
struct TrainBatch {
  std::vector<AVPairFeatures> storage;
  std::vector<BatchItem> items;
};

// Half positives, half negatives (positives rounded down). A positive is two
// distinct pairs of one speaker inside one video; a negative takes its two
// pairs from two different videos. Visible faces are then dropped with
// probability missing_prob. Fails if the corpus has fewer than two videos or
// no speaker with two pairs.
TrainBatch sample_batch(const SyntheticCorpus& corpus, int batch_size,
                        double missing_prob, Rng& rng);

struct TrainResult {
  RelationModel model;
  double threshold = 0.5;  // clustering threshold picked on validation data
  std::vector<std::pair<int, double>> training_log;  // (iteration, loss)
};

// Adam on sampled batches for cfg.iterations steps. Every cfg.eval_every
// iterations (and at the last one) the current model diarizes corpus_val at
// every cfg.threshold_grid value without augmentation; the snapshot and
// threshold with the lowest validation DER are returned. Ties keep the
// earlier snapshot and the smaller threshold. Deterministic in cfg.seed.
TrainResult train(const SyntheticCorpus& corpus_train,
                  const SyntheticCorpus& corpus_val, const Config& cfg);

// Two columns: iteration, loss.
void write_training_log_csv(const std::vector<std::pair<int, double>>& log,
                            const std::string& path);

}  // namespace avdiar
