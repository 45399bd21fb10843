#include "avdiar/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "avdiar/rttm.hpp"

namespace avdiar {

SimilarityMatrix SimilarityMatrix::identity(int n) {
  SimilarityMatrix sim;
  sim.n = n;
  sim.values.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) sim.at(i, i) = 1.0;
  return sim;
}

SimilarityMatrix build_similarity_matrix(const std::vector<AVPairFeatures>& pairs,
                                         const RelationModel& model) {
  const int n = static_cast<int>(pairs.size());
  SimilarityMatrix sim = SimilarityMatrix::identity(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double s = 0.5 * (score_pair(model, pairs[i], pairs[j]) +
                              score_pair(model, pairs[j], pairs[i]));
      sim.at(i, j) = s;
      sim.at(j, i) = s;
    }
  }
  return sim;
}

std::vector<int> ahc_cluster(const SimilarityMatrix& sim, double threshold,
                             Linkage linkage) {
  const int n = sim.n;
  if (n < 0 || sim.values.size() != static_cast<size_t>(n) * n) {
    throw Error("similarity matrix has inconsistent size");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(sim.at(i, j))) throw Error("similarity must be finite");
      if (std::abs(sim.at(i, j) - sim.at(j, i)) > 1e-9) {
        throw Error("similarity matrix must be symmetric");
      }
    }
  }
  if (n == 0) return {};

  // One working row/column per cluster, keyed by smallest member index;
  // inactive slots stay behind after their cluster is merged away.
  std::vector<bool> active(static_cast<size_t>(n), true);
  std::vector<int> size(static_cast<size_t>(n), 1);
  std::vector<int> parent(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) parent[static_cast<size_t>(i)] = i;
  SimilarityMatrix link = sim;

  while (true) {
    int best_a = -1, best_b = -1;
    double best = 0.0;
    for (int a = 0; a < n; ++a) {
      if (!active[static_cast<size_t>(a)]) continue;
      for (int b = a + 1; b < n; ++b) {
        if (!active[static_cast<size_t>(b)]) continue;
        if (best_a < 0 || link.at(a, b) > best) {
          best = link.at(a, b);
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best_a < 0 || best < threshold) break;

    for (int c = 0; c < n; ++c) {
      if (!active[static_cast<size_t>(c)] || c == best_a || c == best_b) continue;
      double sa = link.at(best_a, c);
      double sb = link.at(best_b, c);
      double merged = 0.0;
      switch (linkage) {
        case Linkage::kAverage:
          merged = (size[static_cast<size_t>(best_a)] * sa +
                    size[static_cast<size_t>(best_b)] * sb) /
                   (size[static_cast<size_t>(best_a)] +
                    size[static_cast<size_t>(best_b)]);
          break;
        case Linkage::kSingle:
          merged = std::max(sa, sb);
          break;
        case Linkage::kComplete:
          merged = std::min(sa, sb);
          break;
      }
      link.at(best_a, c) = merged;
      link.at(c, best_a) = merged;
    }
    size[static_cast<size_t>(best_a)] += size[static_cast<size_t>(best_b)];
    active[static_cast<size_t>(best_b)] = false;
    parent[static_cast<size_t>(best_b)] = best_a;
  }

  // Path-compress to cluster keys, then number keys by first appearance.
  std::vector<int> labels(static_cast<size_t>(n));
  std::vector<int> label_of_key(static_cast<size_t>(n), -1);
  int next_label = 0;
  for (int i = 0; i < n; ++i) {
    int root = i;
    while (parent[static_cast<size_t>(root)] != root) {
      root = parent[static_cast<size_t>(root)];
    }
    if (label_of_key[static_cast<size_t>(root)] < 0) {
      label_of_key[static_cast<size_t>(root)] = next_label++;
    }
    labels[static_cast<size_t>(i)] = label_of_key[static_cast<size_t>(root)];
  }
  return labels;
}

Diarization segments_to_hypothesis(const std::string& file_id,
                                   const std::vector<TimeInterval>& windows,
                                   const std::vector<int>& labels) {
  if (windows.size() != labels.size()) {
    throw Error("got " + std::to_string(labels.size()) + " labels for " +
                std::to_string(windows.size()) + " windows");
  }
  if (windows.empty()) {
    Diarization empty;
    empty.file_id = file_id;
    return empty;
  }
  std::vector<RttmRecord> records;
  for (size_t i = 0; i < windows.size(); ++i) {
    records.push_back(RttmRecord{file_id, 1, windows[i],
                                 "spk" + std::to_string(labels[i])});
  }
  return normalize_diarization(records);
}

void write_similarity_csv(const SimilarityMatrix& sim, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write similarity matrix to " + path);
  char buf[64];
  for (int i = 0; i < sim.n; ++i) {
    for (int j = 0; j < sim.n; ++j) {
      std::snprintf(buf, sizeof buf, "%.6f", sim.at(i, j));
      out << (j == 0 ? "" : ",") << buf;
    }
    out << "\n";
  }
  if (!out) throw Error("failed writing similarity matrix to " + path);
}

}  // namespace avdiar
