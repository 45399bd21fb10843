#pragma once

#include <string>
#include <utility>
#include <vector>

#include "avdiar/types.hpp"

namespace avdiar {

// Diarization error for one file, in seconds and as percentages of the
// scored reference speech. der_pct is the sum of the three component
// percentages.
struct DerBreakdown {
  std::string file_id;
  double scored_speech = 0.0;
  double missed = 0.0;
  double false_alarm = 0.0;
  double confusion = 0.0;
  double missed_pct = 0.0;
  double false_alarm_pct = 0.0;
  double confusion_pct = 0.0;
  double der_pct = 0.0;
  std::vector<std::pair<std::string, std::string>> mapping;  // hyp -> ref
};

// Injective hypothesis-to-reference speaker mapping that maximizes total
// overlapped time. Only speaker pairs that actually overlap are eligible.
// Among maximizing solutions the result is the lexicographically smallest:
// hypothesis labels are visited in sorted order and each takes the smallest
// reference label that keeps the optimal total reachable. Sorted by
// hypothesis label.
std::vector<std::pair<std::string, std::string>> map_speakers(
    const Diarization& ref, const Diarization& hyp);

// Collar-based diarization error rate. Time within `collar` seconds of any
// reference segment boundary is excluded. Each remaining region with R active
// reference speakers and H active (mapped) hypothesis speakers contributes
// R * len to the scored total, max(0, R - H) * len missed, max(0, H - R) * len
// false alarm, and (min(R, H) - matched) * len confusion. With score_overlap
// false, regions where the reference has overlapped speech are excluded too.
// A reference with no speech left to score raises Error.
DerBreakdown compute_der(const Diarization& ref, const Diarization& hyp,
                         double collar, bool score_overlap = true);

// Independent check of compute_der: walks 1 ms ticks, classifying each tick
// midpoint, and finds the speaker mapping by enumerating every injective
// assignment with the same tie-break. Limited to 8 speakers per side and 600
// seconds; intended for tests and audits, not production scoring.
DerBreakdown brute_force_der(const Diarization& ref, const Diarization& hyp,
                             double collar, bool score_overlap = true);

// Pools per-file breakdowns into one, weighting by scored speech.
DerBreakdown aggregate_der(const std::vector<DerBreakdown>& parts);

// Human-readable table of per-file rows plus the aggregate.
std::string format_der_report(const std::vector<DerBreakdown>& parts,
                              const DerBreakdown& total);

// CSV with header, one row per file, and a TOTAL row.
void write_der_csv(const std::string& path,
                   const std::vector<DerBreakdown>& parts,
                   const DerBreakdown& total);

}  // namespace avdiar
