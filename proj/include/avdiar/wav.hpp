#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avdiar/error.hpp"

namespace avdiar {

// Mono waveform, samples scaled to [-1, 1) by 1/32768.
// Invariant: sample_rate matches the configured rate after loading.
struct AudioSignal {
  int sample_rate = 16000;
  std::vector<double> samples;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Decodes a RIFF/WAVE byte buffer. Accepts PCM16 mono only; multi-channel or
// non-PCM16 data raises an unsupported-format Error, and a sample rate other
// than expected_rate raises an Error asking for external resampling.
AudioSignal read_wav(const std::vector<std::uint8_t>& bytes, int expected_rate);
AudioSignal read_wav_file(const std::string& path, int expected_rate);

// Encodes PCM16 mono; samples are clipped to [-1, 1] and rounded.
std::vector<std::uint8_t> write_wav(const AudioSignal& signal);
void write_wav_file(const std::string& path, const AudioSignal& signal);

}  // namespace avdiar
