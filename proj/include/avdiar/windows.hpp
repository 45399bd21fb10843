#pragma once

#include <vector>

#include "avdiar/config.hpp"
#include "avdiar/types.hpp"

namespace avdiar {

// Covers a speech interval with fixed-length scoring windows:
// [t, t+window_s] for t = onset, onset+stride_s, ... while they fit, plus one
// tail window [offset-window_s, offset] when the last stride leaves a
// remainder. Intervals shorter than window_s yield the interval itself.
// All windows lie inside the interval and their union equals it.
std::vector<TimeInterval> slide_segments(const TimeInterval& interval,
                                         const Config& cfg);

}  // namespace avdiar
