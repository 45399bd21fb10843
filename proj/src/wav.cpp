#include "avdiar/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace avdiar {

namespace {

constexpr double kScale = 1.0 / 32768.0;

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void push_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

void push_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

}  // namespace

AudioSignal read_wav(const std::vector<std::uint8_t>& bytes, int expected_rate) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::uint32_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    std::uint32_t chunk_size = read_u32(chunk + 4);
    if (pos + 8 + chunk_size > bytes.size()) {
      throw Error("truncated WAVE chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw Error("truncated fmt chunk");
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = chunk_size;
    }
    pos += 8 + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) throw Error("WAVE file missing fmt or data");
  if (format != 1 || bits != 16) {
    throw Error("unsupported format: only PCM16 WAVE is accepted");
  }
  if (channels != 1) {
    throw Error("unsupported format: expected mono, got " +
                std::to_string(channels) + " channels");
  }
  if (static_cast<int>(rate) != expected_rate) {
    throw Error("sample rate is " + std::to_string(rate) + " Hz, expected " +
                std::to_string(expected_rate) +
                " Hz; resample the file externally");
  }

  AudioSignal signal;
  signal.sample_rate = expected_rate;
  signal.samples.resize(data_size / 2);
  for (size_t i = 0; i < signal.samples.size(); ++i) {
    std::int16_t s = static_cast<std::int16_t>(read_u16(data + 2 * i));
    signal.samples[i] = s * kScale;
  }
  return signal;
}

AudioSignal read_wav_file(const std::string& path, int expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open WAVE file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_wav(bytes, expected_rate);
}

std::vector<std::uint8_t> write_wav(const AudioSignal& signal) {
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(signal.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);

  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  push_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  push_u32(out, 16);
  push_u16(out, 1);  // PCM
  push_u16(out, 1);  // mono
  push_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  push_u32(out, static_cast<std::uint32_t>(signal.sample_rate * 2));
  push_u16(out, 2);   // block align
  push_u16(out, 16);  // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  push_u32(out, data_size);

  for (double x : signal.samples) {
    double scaled = std::round(x * 32768.0);
    scaled = std::clamp(scaled, -32768.0, 32767.0);
    push_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

void write_wav_file(const std::string& path, const AudioSignal& signal) {
  auto bytes = write_wav(signal);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write WAVE file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing WAVE file: " + path);
}

}  // namespace avdiar
