#pragma once

#include <vector>

#include "avdiar/config.hpp"
#include "avdiar/types.hpp"
#include "avdiar/wav.hpp"

namespace avdiar {

// Frame-energy voice activity detector. Frame energies (spec_win_ms window,
// spec_hop_ms hop, in dB) are thresholded at the vad_percentile of all frames
// plus vad_offset_db; decisions pass a width-vad_median_frames binary median
// filter; runs become intervals; intervals shorter than vad_min_speech_s are
// dropped and gaps narrower than vad_bridge_gap_s are bridged.
// Output intervals are disjoint, sorted, and lie inside [0, duration].
// A relative threshold cannot mark everything speech: signals without any
// quieter frames (all-speech or all-silence) come back empty.
std::vector<TimeInterval> energy_vad(const AudioSignal& signal,
                                     const Config& cfg);

}  // namespace avdiar
