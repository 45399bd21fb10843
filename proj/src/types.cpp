#include "avdiar/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace avdiar {

double TimeInterval::overlap(const TimeInterval& other) const {
  double lo = std::max(onset, other.onset);
  double hi = std::min(offset, other.offset);
  return std::max(0.0, hi - lo);
}

bool interval_valid(const TimeInterval& iv) {
  return std::isfinite(iv.onset) && std::isfinite(iv.offset) &&
         iv.onset >= 0.0 && iv.offset > iv.onset;
}

TimeInterval make_interval(double onset, double offset) {
  TimeInterval iv{onset, offset};
  if (!std::isfinite(onset) || !std::isfinite(offset)) {
    throw Error("interval bounds must be finite");
  }
  if (onset < 0.0) {
    throw Error("interval onset must be non-negative, got " +
                std::to_string(onset));
  }
  if (offset <= onset) {
    throw Error("interval offset must exceed onset, got [" +
                std::to_string(onset) + ", " + std::to_string(offset) + ")");
  }
  return iv;
}

namespace {

bool has_whitespace(const std::string& s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

void validate_record(const RttmRecord& rec) {
  if (rec.file_id.empty() || has_whitespace(rec.file_id)) {
    throw Error("record file_id must be non-empty without whitespace");
  }
  if (rec.speaker.empty() || has_whitespace(rec.speaker)) {
    throw Error("record speaker must be non-empty without whitespace");
  }
  if (!interval_valid(rec.interval)) {
    throw Error("record interval invalid for speaker '" + rec.speaker + "'");
  }
}

double Diarization::total_speech() const {
  double total = 0.0;
  for (const auto& [iv, spk] : segments) total += iv.duration();
  return total;
}

}  // namespace avdiar
