#pragma once

#include <cstdint>
#include <vector>

#include "hvc/audio_io.h"

namespace hvc {

// Log-magnitude STFT in dB, Hann window; frames x bins, row-major.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> db;
};

Spectrogram stft_db(const AudioBuffer& audio, double frame_ms = 20.0, double hop_ms = 10.0);

// Binary PGM (P5): time runs left to right, frequency bottom to top. The
// top `dynamic_range_db` below the peak map linearly onto 0..255.
std::vector<std::uint8_t> spectrogram_pgm(const Spectrogram& spec, double dynamic_range_db = 80.0);

}  // namespace hvc
