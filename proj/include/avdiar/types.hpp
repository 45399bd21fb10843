#pragma once

#include <string>
#include <utility>
#include <vector>

#include "avdiar/error.hpp"

namespace avdiar {

// Tolerance for time comparisons. Times originate from millisecond-resolution
// text, so 1e-6 s cleanly separates "equal" from "distinct".
inline constexpr double kTimeEps = 1e-6;

// Half-open speech interval [onset, offset) in seconds.
// Invariants: both finite, onset >= 0, offset > onset.
struct TimeInterval {
  double onset = 0.0;
  double offset = 0.0;

  double duration() const { return offset - onset; }
  bool contains(double t) const { return onset <= t && t < offset; }

  // Length of the intersection with another interval (0 if disjoint).
  double overlap(const TimeInterval& other) const;

  bool operator==(const TimeInterval& other) const = default;
};

// Validates the TimeInterval invariants, throws Error on violation.
TimeInterval make_interval(double onset, double offset);
bool interval_valid(const TimeInterval& iv);

// One speech turn attributed to a speaker within one recording.
// Invariants: file_id non-empty without whitespace, speaker likewise
// (whitespace would break the one-line-per-record text format).
struct RttmRecord {
  std::string file_id;
  int channel = 1;
  TimeInterval interval;
  std::string speaker;

  bool operator==(const RttmRecord& other) const = default;
};

// Throws Error describing the first violated invariant, if any.
void validate_record(const RttmRecord& rec);

// Who-spoke-when for a single recording. Segments are sorted by onset
// (ties by offset, then speaker). After normalize_diarization the segments
// of any one speaker never overlap; different speakers may.
struct Diarization {
  std::string file_id;
  std::vector<std::pair<TimeInterval, std::string>> segments;

  double total_speech() const;  // sum of segment durations
};

}  // namespace avdiar
