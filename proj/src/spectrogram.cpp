#include "avdiar/spectrogram.hpp"

#include <cmath>
#include <complex>

namespace avdiar {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kLogFloor = 1e-10;

// In-place iterative radix-2 FFT. n must be a power of two.
void fft(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double angle = -2.0 * kPi / static_cast<double>(len);
    std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

Spectrogram compute_spectrogram(const AudioSignal& signal, const Config& cfg) {
  const int win = static_cast<int>(
      std::lround(cfg.spec_win_ms * 1e-3 * signal.sample_rate));
  const int hop = static_cast<int>(
      std::lround(cfg.spec_hop_ms * 1e-3 * signal.sample_rate));
  if (win <= 0 || hop <= 0) throw Error("spectrogram window/hop too small");
  const auto len = static_cast<long long>(signal.samples.size());
  if (len < win) {
    throw Error("signal too short for one spectrogram frame: " +
                std::to_string(len) + " samples, window " + std::to_string(win));
  }

  const size_t nfft = next_pow2(static_cast<size_t>(win));
  const int num_bins = static_cast<int>(nfft / 2 + 1);
  const int num_frames = static_cast<int>((len - win) / hop + 1);

  std::vector<double> hamming(static_cast<size_t>(win));
  for (int n = 0; n < win; ++n) {
    hamming[n] = 0.54 - 0.46 * std::cos(2.0 * kPi * n / (win - 1));
  }

  Spectrogram spec;
  spec.num_frames = num_frames;
  spec.num_bins = num_bins;
  spec.values.resize(static_cast<size_t>(num_frames) * num_bins);

  std::vector<std::complex<double>> frame(nfft);
  for (int f = 0; f < num_frames; ++f) {
    const double* x = signal.samples.data() + static_cast<size_t>(f) * hop;
    for (int n = 0; n < win; ++n) frame[n] = x[n] * hamming[n];
    for (size_t n = win; n < nfft; ++n) frame[n] = 0.0;
    fft(frame);
    double* row = spec.values.data() + static_cast<size_t>(f) * num_bins;
    for (int k = 0; k < num_bins; ++k) {
      row[k] = std::log(std::norm(frame[k]) + kLogFloor);
    }
  }
  return spec;
}

}  // namespace avdiar
