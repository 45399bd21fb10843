#pragma once

#include <string>
#include <vector>

#include "avdiar/config.hpp"
#include "avdiar/relation.hpp"
#include "avdiar/types.hpp"

namespace avdiar {

// Symmetric pairwise similarity in [0, 1]-ish space; higher means more alike.
struct SimilarityMatrix {
  int n = 0;
  std::vector<double> values;  // n * n, row-major

  static SimilarityMatrix identity(int n);
  double& at(int i, int j) { return values[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return values[static_cast<size_t>(i) * n + j]; }
};

// S[i][j] = mean of the two scoring directions (the scorer itself is not
// symmetric), S[i][i] = 1. Symmetric by construction.
SimilarityMatrix build_similarity_matrix(const std::vector<AVPairFeatures>& pairs,
                                         const RelationModel& model);

// Agglomerative clustering: repeatedly merges the most similar cluster pair
// until every linkage similarity falls below the threshold. Ties prefer the
// lexicographically smallest pair of cluster keys, where a cluster's key is
// its smallest member index. Labels are 0-based in order of first appearance.
std::vector<int> ahc_cluster(const SimilarityMatrix& sim, double threshold,
                             Linkage linkage);

// One diarization segment per window, speakers named "spk<label>"; touching
// same-speaker windows are merged.
Diarization segments_to_hypothesis(const std::string& file_id,
                                   const std::vector<TimeInterval>& windows,
                                   const std::vector<int>& labels);

// Row-major, six decimals, one row per line.
void write_similarity_csv(const SimilarityMatrix& sim, const std::string& path);

}  // namespace avdiar
