#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avdiar/config.hpp"
#include "avdiar/features.hpp"

namespace avdiar {

// Offsets into the flat parameter vector. Channel count D = 2*(c_face +
// c_audio); layout is masks[4*D], then per residual block conv1 weights
// [9*D*D] + bias [D] and conv2 weights + bias, then the scoring head
// [D] + 1. Total 36*D*D + 9*D + 1.
struct ParamLayout {
  int dim = 0;
  std::size_t masks = 0;
  std::size_t conv1_w[2] = {0, 0};
  std::size_t conv1_b[2] = {0, 0};
  std::size_t conv2_w[2] = {0, 0};
  std::size_t conv2_b[2] = {0, 0};
  std::size_t head_w = 0;
  std::size_t head_b = 0;
  std::size_t total = 0;
};

ParamLayout make_layout(int dim);

// Pairwise same-speaker scorer over assembled two-sided feature maps: one
// learnable mask per visibility case, two residual conv blocks, global
// average pooling, and a sigmoid head. All parameters live in one flat
// vector so optimizers and checkpoints treat the model as a single array.
struct RelationModel {
  int c_audio = 0;
  int c_face = 0;
  int h = 0;
  int w = 0;
  std::vector<double> params;

  int dim() const { return 2 * (c_face + c_audio); }
  ParamLayout layout() const { return make_layout(dim()); }
};

// Masks start at 1 (pass-through), conv weights are He-initialized, and the
// head starts at zero, so an untrained model scores every pair exactly 0.5.
RelationModel init_model(const Config& cfg, std::uint64_t seed);

// 0 = neither face visible, 1 = right only, 2 = left only, 3 = both.
int visibility_case(bool left_visible, bool right_visible);

// Stacks [left face | left audio | right face | right audio] channels on an
// h-by-w grid (pooling larger maps down, zero-filling missing faces) without
// applying any mask. Channel counts must match the model.
FeatureMap assemble_raw_input(const RelationModel& model,
                              const AVPairFeatures& left,
                              const AVPairFeatures& right);

// assemble_raw_input with the visibility case's mask applied per channel.
FeatureMap assemble_input(const RelationModel& model, const AVPairFeatures& left,
                          const AVPairFeatures& right);

// Same-speaker probability in (0, 1). Not symmetric in its arguments.
double score_pair(const RelationModel& model, const AVPairFeatures& left,
                  const AVPairFeatures& right);

struct BatchItem {
  const AVPairFeatures* left = nullptr;
  const AVPairFeatures* right = nullptr;
  double label = 0.0;  // 1 same speaker, 0 different
};

// Mean squared error of the batch scores against the labels.
double batch_loss(const RelationModel& model, const std::vector<BatchItem>& batch);

struct BatchResult {
  double loss = 0.0;
  std::vector<double> scores;
};

// Computes the batch loss and accumulates dloss/dparams into grad (resized
// and zeroed here). The gradient is exact: each visibility mask only receives
// gradient from pairs of its own case, and saturated scores propagate exact
// zeros.
BatchResult forward_backward(const RelationModel& model,
                             const std::vector<BatchItem>& batch,
                             std::vector<double>& grad);

// Smallest |input| seen by any ReLU while scoring the batch. Near-zero
// margins put a kink between the two sides of a finite difference, so
// numerical gradient checks should redraw their data when this is tiny.
double relu_margin(const RelationModel& model, const std::vector<BatchItem>& batch);

// Four comma-separated rows, one per visibility case, D values each.
void export_masks_csv(const RelationModel& model, const std::string& path);

struct Checkpoint {
  RelationModel model;
  double threshold = 0.5;  // clustering threshold chosen on validation data
};

// Binary format: "AVDMODEL" magic, u32 version, u32 c_audio/c_face/h/w,
// f64 threshold, u64 parameter count, then the parameters as little-endian
// f64. Loading restores them bit for bit.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace avdiar
