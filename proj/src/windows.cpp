#include "avdiar/windows.hpp"

namespace avdiar {

std::vector<TimeInterval> slide_segments(const TimeInterval& interval,
                                         const Config& cfg) {
  if (!interval_valid(interval)) throw Error("slide_segments: invalid interval");
  const double window = cfg.window_s;
  const double stride = cfg.stride_s;

  if (interval.duration() <= window + kTimeEps) {
    return {interval};
  }

  std::vector<TimeInterval> windows;
  double t = interval.onset;
  while (t + window <= interval.offset + kTimeEps) {
    windows.push_back(TimeInterval{t, t + window});
    t += stride;
  }
  if (interval.offset - windows.back().offset > kTimeEps) {
    windows.push_back(TimeInterval{interval.offset - window, interval.offset});
  }
  return windows;
}

}  // namespace avdiar
