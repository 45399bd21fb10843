#pragma once

#include <vector>

#include "avdiar/config.hpp"
#include "avdiar/wav.hpp"

namespace avdiar {

// Log-power spectrogram, frames-by-bins row-major.
struct Spectrogram {
  int num_frames = 0;
  int num_bins = 0;
  std::vector<double> values;  // num_frames * num_bins

  double at(int frame, int bin) const { return values[frame * num_bins + bin]; }
};

// Frames the signal (spec_win_ms window, spec_hop_ms hop), applies a Hamming
// window, zero-pads each frame to the next power of two (512 for the default
// 25 ms at 16 kHz, giving 257 bins), and stores log(|X|^2 + 1e-10).
// num_frames = floor((len - win) / hop) + 1; shorter signals raise Error.
Spectrogram compute_spectrogram(const AudioSignal& signal, const Config& cfg);

}  // namespace avdiar
