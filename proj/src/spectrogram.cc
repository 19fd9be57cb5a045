#include "hvc/spectrogram.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hvc/dsp.h"
#include "hvc/errors.h"

namespace hvc {

Spectrogram stft_db(const AudioBuffer& audio, double frame_ms, double hop_ms) {
  if (!(frame_ms > 0.0) || !(hop_ms > 0.0))
    throw ParameterError("frame and hop must be positive");
  const auto frame_len = static_cast<std::size_t>(
      std::max(1.0, std::round(frame_ms * audio.sample_rate / 1000.0)));
  const auto hop = static_cast<std::size_t>(
      std::max(1.0, std::round(hop_ms * audio.sample_rate / 1000.0)));
  std::vector<double> window(frame_len, 1.0);
  if (frame_len > 1)
    for (std::size_t n = 0; n < frame_len; ++n)
      window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                       static_cast<double>(frame_len - 1));

  Spectrogram s;
  s.bins = next_pow2(frame_len) / 2 + 1;
  for (const auto& f : frame_signal(audio, frame_len, hop, true)) {
    std::vector<double> x = f.samples;
    for (std::size_t n = 0; n < frame_len; ++n) x[n] *= window[n];
    for (double m : magnitude(fft_real(x))) s.db.push_back(20.0 * std::log10(std::max(m, 1e-12)));
    ++s.frames;
  }
  return s;
}

std::vector<std::uint8_t> spectrogram_pgm(const Spectrogram& spec, double dynamic_range_db) {
  if (!(dynamic_range_db > 0.0)) throw ParameterError("dynamic range must be positive");
  const std::string header = "P5\n" + std::to_string(std::max<std::size_t>(spec.frames, 1)) +
                             " " + std::to_string(spec.bins) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  if (spec.frames == 0) {
    out.insert(out.end(), spec.bins, 0);
    return out;
  }
  const double peak = *std::max_element(spec.db.begin(), spec.db.end());
  for (std::size_t b = spec.bins; b-- > 0;) {
    for (std::size_t f = 0; f < spec.frames; ++f) {
      const double rel = (spec.db[f * spec.bins + b] - (peak - dynamic_range_db)) / dynamic_range_db;
      out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(rel, 0.0, 1.0))));
    }
  }
  return out;
}

}  // namespace hvc
