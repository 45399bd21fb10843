#include "avdiar/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "avdiar/rttm.hpp"

namespace avdiar {

namespace {

constexpr double kWeightEps = 1e-9;

struct SpeakerTrack {
  std::string name;
  std::vector<TimeInterval> intervals;

  bool active_at(double t) const {
    for (const auto& iv : intervals) {
      if (iv.onset <= t && t < iv.offset) return true;
    }
    return false;
  }
};

std::vector<SpeakerTrack> speaker_tracks(const Diarization& d) {
  std::map<std::string, std::vector<TimeInterval>> by_speaker;
  for (const auto& [interval, speaker] : d.segments) {
    by_speaker[speaker].push_back(interval);
  }
  std::vector<SpeakerTrack> tracks;
  for (auto& [name, intervals] : by_speaker) {
    tracks.push_back(SpeakerTrack{name, std::move(intervals)});
  }
  return tracks;  // sorted by name via the map
}

double track_overlap(const SpeakerTrack& a, const SpeakerTrack& b) {
  double total = 0.0;
  for (const auto& x : a.intervals) {
    for (const auto& y : b.intervals) total += x.overlap(y);
  }
  return total;
}

// Maximum total weight over injective partial assignments of rows to
// columns (skipping is free). O(n^3) shortest-augmenting-path form with
// potentials, on the square zero-padded cost matrix.
double max_assignment_total(const std::vector<std::vector<double>>& weights) {
  const int rows = static_cast<int>(weights.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(weights[0].size());
  const int n = std::max(rows, cols);
  if (n == 0) return 0.0;

  auto cost = [&](int i, int j) {
    if (i < rows && j < cols) return -weights[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return 0.0;
  };

  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<size_t>(n) + 1, 0);  // column -> row
  std::vector<int> way(static_cast<size_t>(n) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, kInf);
    std::vector<bool> used(static_cast<size_t>(n) + 1, false);
    do {
      used[static_cast<size_t>(j0)] = true;
      const int i0 = match[static_cast<size_t>(j0)];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] -
                           v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    const int i = match[static_cast<size_t>(j)];
    if (i >= 1) total += -cost(i - 1, j - 1);
  }
  return total;
}

// Best achievable total once some rows/columns are already spoken for.
double remaining_total(const std::vector<std::vector<double>>& w,
                       const std::vector<bool>& row_done,
                       const std::vector<bool>& col_done) {
  std::vector<std::vector<double>> sub;
  for (size_t i = 0; i < w.size(); ++i) {
    if (row_done[i]) continue;
    std::vector<double> row;
    for (size_t j = 0; j < w[i].size(); ++j) {
      if (!col_done[j]) row.push_back(w[i][j]);
    }
    sub.push_back(std::move(row));
  }
  if (sub.empty() || sub[0].empty()) return 0.0;
  return max_assignment_total(sub);
}

struct NamedDiarizations {
  Diarization ref;
  Diarization hyp;
};

NamedDiarizations normalized_inputs(const Diarization& ref, const Diarization& hyp) {
  NamedDiarizations out;
  out.ref = normalize_diarization(to_records(ref));
  out.hyp = normalize_diarization(to_records(hyp));
  if (!out.ref.segments.empty() && !out.hyp.segments.empty() &&
      out.ref.file_id != out.hyp.file_id) {
    throw Error("reference file '" + out.ref.file_id +
                "' does not match hypothesis file '" + out.hyp.file_id + "'");
  }
  if (out.ref.file_id.empty()) out.ref.file_id = out.hyp.file_id;
  return out;
}

void finalize_percentages(DerBreakdown& der) {
  if (der.scored_speech < 1e-12) {
    throw Error("nothing to score for file '" + der.file_id + "'");
  }
  der.missed_pct = 100.0 * der.missed / der.scored_speech;
  der.false_alarm_pct = 100.0 * der.false_alarm / der.scored_speech;
  der.confusion_pct = 100.0 * der.confusion / der.scored_speech;
  der.der_pct = der.missed_pct + der.false_alarm_pct + der.confusion_pct;
}

std::vector<std::pair<std::string, std::string>> map_tracks(
    const std::vector<SpeakerTrack>& refs, const std::vector<SpeakerTrack>& hyps) {
  std::vector<std::vector<double>> w(hyps.size(),
                                     std::vector<double>(refs.size(), 0.0));
  for (size_t h = 0; h < hyps.size(); ++h) {
    for (size_t r = 0; r < refs.size(); ++r) {
      w[h][r] = track_overlap(hyps[h], refs[r]);
    }
  }

  std::vector<bool> hyp_done(hyps.size(), false);
  std::vector<bool> ref_done(refs.size(), false);
  double target = remaining_total(w, hyp_done, ref_done);

  std::vector<std::pair<std::string, std::string>> mapping;
  for (size_t h = 0; h < hyps.size(); ++h) {
    hyp_done[h] = true;  // fixed below, or left unmapped
    for (size_t r = 0; r < refs.size(); ++r) {
      if (ref_done[r] || w[h][r] <= kWeightEps) continue;
      ref_done[r] = true;
      const double rest = remaining_total(w, hyp_done, ref_done);
      if (w[h][r] + rest >= target - kWeightEps) {
        mapping.emplace_back(hyps[h].name, refs[r].name);
        target = rest;
        break;
      }
      ref_done[r] = false;
    }
  }
  return mapping;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> map_speakers(
    const Diarization& ref, const Diarization& hyp) {
  auto inputs = normalized_inputs(ref, hyp);
  return map_tracks(speaker_tracks(inputs.ref), speaker_tracks(inputs.hyp));
}

DerBreakdown compute_der(const Diarization& ref, const Diarization& hyp,
                         double collar, bool score_overlap) {
  if (!(collar >= 0.0) || !std::isfinite(collar)) {
    throw Error("collar must be a non-negative number of seconds");
  }
  auto inputs = normalized_inputs(ref, hyp);
  auto refs = speaker_tracks(inputs.ref);
  auto hyps = speaker_tracks(inputs.hyp);

  DerBreakdown der;
  der.file_id = inputs.ref.file_id;
  der.mapping = map_tracks(refs, hyps);

  // Hypothesis speakers renumbered into reference names; unmapped speakers
  // keep a placeholder no reference name can collide with.
  std::map<std::string, std::string> renamed;
  for (const auto& [h, r] : der.mapping) renamed[h] = r;
  for (const auto& track : hyps) {
    if (renamed.find(track.name) == renamed.end()) {
      renamed[track.name] = "\tunmapped:" + track.name;
    }
  }

  std::vector<double> ref_boundaries;
  std::vector<double> cuts;
  for (const auto& track : refs) {
    for (const auto& iv : track.intervals) {
      for (double b : {iv.onset, iv.offset}) {
        ref_boundaries.push_back(b);
        cuts.push_back(b);
        cuts.push_back(b - collar);
        cuts.push_back(b + collar);
      }
    }
  }
  for (const auto& track : hyps) {
    for (const auto& iv : track.intervals) {
      cuts.push_back(iv.onset);
      cuts.push_back(iv.offset);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a <= 1e-12; }),
             cuts.end());

  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    if (len <= 1e-12) continue;
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);

    bool in_collar = false;
    for (double b : ref_boundaries) {
      if (std::abs(mid - b) < collar) {
        in_collar = true;
        break;
      }
    }
    if (in_collar) continue;

    std::set<std::string> active_ref;
    for (const auto& track : refs) {
      if (track.active_at(mid)) active_ref.insert(track.name);
    }
    if (!score_overlap && active_ref.size() > 1) continue;

    std::set<std::string> active_hyp;
    for (const auto& track : hyps) {
      if (track.active_at(mid)) active_hyp.insert(renamed[track.name]);
    }

    const auto r = static_cast<double>(active_ref.size());
    const auto h = static_cast<double>(active_hyp.size());
    double matched = 0.0;
    for (const auto& name : active_ref) {
      if (active_hyp.count(name) != 0) matched += 1.0;
    }

    der.scored_speech += r * len;
    der.missed += std::max(0.0, r - h) * len;
    der.false_alarm += std::max(0.0, h - r) * len;
    der.confusion += (std::min(r, h) - matched) * len;
  }

  finalize_percentages(der);
  return der;
}

DerBreakdown brute_force_der(const Diarization& ref, const Diarization& hyp,
                             double collar, bool score_overlap) {
  if (!(collar >= 0.0) || !std::isfinite(collar)) {
    throw Error("collar must be a non-negative number of seconds");
  }
  auto inputs = normalized_inputs(ref, hyp);
  auto refs = speaker_tracks(inputs.ref);
  auto hyps = speaker_tracks(inputs.hyp);
  if (refs.size() > 8 || hyps.size() > 8) {
    throw Error("brute-force scoring supports at most 8 speakers per side");
  }
  double end = 0.0;
  for (const auto& track : refs) {
    for (const auto& iv : track.intervals) end = std::max(end, iv.offset);
  }
  for (const auto& track : hyps) {
    for (const auto& iv : track.intervals) end = std::max(end, iv.offset);
  }
  if (end > 600.0) {
    throw Error("brute-force scoring supports at most 600 seconds");
  }

  std::vector<std::vector<double>> w(hyps.size(),
                                     std::vector<double>(refs.size(), 0.0));
  for (size_t h = 0; h < hyps.size(); ++h) {
    for (size_t r = 0; r < refs.size(); ++r) {
      w[h][r] = track_overlap(hyps[h], refs[r]);
    }
  }

  // Exhaustive injective assignment search; ties prefer the assignment
  // sequence that is lexicographically smallest with "unmapped" last.
  std::vector<int> assign(hyps.size(), -1);
  std::vector<int> best_assign;
  double best_total = -1.0;
  std::vector<bool> used(refs.size(), false);
  auto lex_less = [&](const std::vector<int>& a, const std::vector<int>& b) {
    for (size_t i = 0; i < a.size(); ++i) {
      const unsigned long long ka =
          a[i] < 0 ? std::numeric_limits<unsigned long long>::max()
                   : static_cast<unsigned long long>(a[i]);
      const unsigned long long kb =
          b[i] < 0 ? std::numeric_limits<unsigned long long>::max()
                   : static_cast<unsigned long long>(b[i]);
      if (ka != kb) return ka < kb;
    }
    return false;
  };
  auto consider = [&](double total) {
    if (total > best_total + kWeightEps ||
        (total > best_total - kWeightEps &&
         (best_assign.empty() || lex_less(assign, best_assign)))) {
      best_total = total;
      best_assign = assign;
    }
  };
  auto search = [&](auto&& self, size_t h, double total) -> void {
    if (h == hyps.size()) {
      consider(total);
      return;
    }
    for (size_t r = 0; r < refs.size(); ++r) {
      if (used[r] || w[h][r] <= kWeightEps) continue;
      used[r] = true;
      assign[h] = static_cast<int>(r);
      self(self, h + 1, total + w[h][r]);
      used[r] = false;
    }
    assign[h] = -1;
    self(self, h + 1, total);
  };
  search(search, 0, 0.0);

  DerBreakdown der;
  der.file_id = inputs.ref.file_id;
  std::vector<std::string> hyp_names(hyps.size());
  for (size_t h = 0; h < hyps.size(); ++h) {
    if (best_assign[h] >= 0) {
      hyp_names[h] = refs[static_cast<size_t>(best_assign[h])].name;
      der.mapping.emplace_back(hyps[h].name, hyp_names[h]);
    } else {
      hyp_names[h] = "\tunmapped:" + hyps[h].name;
    }
  }

  std::vector<double> ref_boundaries;
  for (const auto& track : refs) {
    for (const auto& iv : track.intervals) {
      ref_boundaries.push_back(iv.onset);
      ref_boundaries.push_back(iv.offset);
    }
  }

  const double res = 1e-3;
  const auto ticks = static_cast<long long>(std::ceil(end / res));
  for (long long k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * res + res / 2.0;

    bool in_collar = false;
    for (double b : ref_boundaries) {
      if (std::abs(t - b) < collar) {
        in_collar = true;
        break;
      }
    }
    if (in_collar) continue;

    std::set<std::string> active_ref;
    for (const auto& track : refs) {
      if (track.active_at(t)) active_ref.insert(track.name);
    }
    if (!score_overlap && active_ref.size() > 1) continue;
    std::set<std::string> active_hyp;
    for (size_t h = 0; h < hyps.size(); ++h) {
      if (hyps[h].active_at(t)) active_hyp.insert(hyp_names[h]);
    }

    const auto r = static_cast<double>(active_ref.size());
    const auto hh = static_cast<double>(active_hyp.size());
    double matched = 0.0;
    for (const auto& name : active_ref) {
      if (active_hyp.count(name) != 0) matched += 1.0;
    }
    der.scored_speech += r * res;
    der.missed += std::max(0.0, r - hh) * res;
    der.false_alarm += std::max(0.0, hh - r) * res;
    der.confusion += (std::min(r, hh) - matched) * res;
  }

  finalize_percentages(der);
  return der;
}

DerBreakdown aggregate_der(const std::vector<DerBreakdown>& parts) {
  DerBreakdown total;
  total.file_id = "TOTAL";
  for (const auto& part : parts) {
    total.scored_speech += part.scored_speech;
    total.missed += part.missed;
    total.false_alarm += part.false_alarm;
    total.confusion += part.confusion;
  }
  finalize_percentages(total);
  return total;
}

std::string format_der_report(const std::vector<DerBreakdown>& parts,
                              const DerBreakdown& total) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %10s %8s %8s %8s %8s\n", "file",
                "scored_s", "miss%", "fa%", "conf%", "der%");
  out << line;
  auto row = [&](const DerBreakdown& der) {
    std::snprintf(line, sizeof line, "%-16s %10.3f %8.2f %8.2f %8.2f %8.2f\n",
                  der.file_id.c_str(), der.scored_speech, der.missed_pct,
                  der.false_alarm_pct, der.confusion_pct, der.der_pct);
    out << line;
  };
  for (const auto& part : parts) row(part);
  row(total);
  return out.str();
}

void write_der_csv(const std::string& path,
                   const std::vector<DerBreakdown>& parts,
                   const DerBreakdown& total) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write score report to " + path);
  out << "file,scored_speech_s,missed_pct,false_alarm_pct,confusion_pct,der_pct\n";
  char line[200];
  auto row = [&](const DerBreakdown& der) {
    std::snprintf(line, sizeof line, "%s,%.3f,%.6f,%.6f,%.6f,%.6f\n",
                  der.file_id.c_str(), der.scored_speech, der.missed_pct,
                  der.false_alarm_pct, der.confusion_pct, der.der_pct);
    out << line;
  };
  for (const auto& part : parts) row(part);
  row(total);
  if (!out) throw Error("failed writing score report to " + path);
}

}  // namespace avdiar
