#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hvc {

inline constexpr int kCanonicalRate = 16000;

// Mono PCM audio with normalized samples.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kCanonicalRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;
};

// Parses a RIFF/WAVE container holding 16-bit PCM or 32-bit IEEE float data
// with one or two channels. Stereo is averaged down to mono.
AudioBuffer read_wav(std::span<const std::uint8_t> bytes);

// Serializes as 16-bit PCM mono. Samples are quantized with round(x * 32768)
// and clamped to [-32767, 32767], so read_wav(write_wav(a)) rewrites to the
// same bytes.
std::vector<std::uint8_t> write_wav(const AudioBuffer& audio);

// 32-bit IEEE float mono. Used where 16-bit quantization would mask the
// quantity being measured.
std::vector<std::uint8_t> write_wav_float32(const AudioBuffer& audio);

AudioBuffer load_wav(const std::string& path);
void save_wav(const std::string& path, const AudioBuffer& audio,
              bool float32 = false);

// Linear-interpolation resampling; identity when the rates match.
AudioBuffer resample(const AudioBuffer& audio, int target_rate);

// Throws ParameterError unless the buffer is at the canonical 16 kHz rate.
void require_canonical_rate(const AudioBuffer& audio, const char* what);

}  // namespace hvc
