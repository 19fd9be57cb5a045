#pragma once

// Deterministic test signals. Independent of the library's DSP kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "hvc/audio_io.h"
#include "hvc/vad.h"

namespace hvc::testing {

struct Utterance {
  AudioBuffer audio;
  std::vector<SpeechRegion> syllables;
};

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline double gauss(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Syllables separated by short pauses over a faint white-noise background.
// Voiced parts are formant-shaped harmonic series with pitch glide, vibrato
// and jitter; some syllables open with a fricative noise burst. Peak 0.5.
inline Utterance synth_utterance(std::uint64_t seed, double duration_s = 1.0,
                                 double background_rms = 1e-3) {
  constexpr int fs = kCanonicalRate;
  std::mt19937_64 rng(seed);
  const auto n = static_cast<std::size_t>(duration_s * fs);
  std::vector<double> x(n, 0.0);
  std::vector<SpeechRegion> syllables;

  double t = uniform(rng, 0.08, 0.15);
  while (t + 0.15 < duration_s - 0.05) {
    const double len = std::min(uniform(rng, 0.15, 0.3), duration_s - 0.05 - t);
    const double f0_start = uniform(rng, 90.0, 220.0);
    const double f0_end = f0_start * uniform(rng, 0.7, 1.3);
    const double vibrato_hz = uniform(rng, 4.0, 7.0);
    const double formants[3] = {uniform(rng, 300, 800), uniform(rng, 900, 2200),
                                uniform(rng, 2300, 3200)};
    const double widths[3] = {uniform(rng, 80, 150), uniform(rng, 100, 200),
                              uniform(rng, 150, 250)};
    const bool fricative = uniform01(rng) < 0.5;
    const double fric_len = fricative ? uniform(rng, 0.03, 0.08) : 0.0;
    const auto s0 = static_cast<std::size_t>(t * fs);
    const auto s1 = std::min(n, static_cast<std::size_t>((t + len) * fs));
    const auto fric_end = s0 + static_cast<std::size_t>(fric_len * fs);

    double phase = 0.0;
    double jitter = 0.0;
    double hp_state = 0.0;
    for (std::size_t i = s0; i < s1; ++i) {
      const double u = static_cast<double>(i - s0) / static_cast<double>(s1 - s0);
      jitter = 0.995 * jitter + 0.002 * gauss(rng);
      const double f0 = (f0_start + (f0_end - f0_start) * u) *
                        (1.0 + 0.02 * std::sin(2.0 * std::numbers::pi * vibrato_hz * i / fs) +
                         jitter);
      phase += 2.0 * std::numbers::pi * f0 / fs;
      double v = 0.0;
      if (i >= fric_end) {
        const double uv = static_cast<double>(i - fric_end) / static_cast<double>(s1 - fric_end);
        const double env = std::sin(std::numbers::pi * uv);
        for (int h = 1; f0 * h < 4000.0; ++h) {
          const double f = f0 * h;
          double gain = 0.05;
          for (int k = 0; k < 3; ++k) {
            const double d = (f - formants[k]) / widths[k];
            gain += std::exp(-0.5 * d * d) / (k + 1);
          }
          v += env * gain / std::sqrt(h) * std::sin(h * phase);
        }
      } else {
        // Crude high-passed noise for the fricative onset.
        const double w = gauss(rng);
        const double hp = w - hp_state;
        hp_state = w;
        const double uf = static_cast<double>(i - s0) / static_cast<double>(fric_end - s0);
        v = 0.25 * std::sin(std::numbers::pi * uf) * hp;
      }
      x[i] += v;
    }
    syllables.push_back({static_cast<double>(s0) / fs, static_cast<double>(s1) / fs});
    t += len + uniform(rng, 0.05, 0.12);
  }

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (auto& v : x) v *= 0.5 / peak;
  for (auto& v : x) v += background_rms * gauss(rng);
  return {AudioBuffer{std::move(x), fs}, std::move(syllables)};
}

// Sum of random-phase tones spread over [lo_hz, hi_hz], scaled to `peak`.
inline std::vector<double> band_noise(std::uint64_t seed, std::size_t n, double lo_hz,
                                      double hi_hz, double peak, int tones = 120) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(n, 0.0);
  for (int k = 0; k < tones; ++k) {
    const double f = uniform(rng, lo_hz, hi_hz);
    const double ph = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double w = 2.0 * std::numbers::pi * f / kCanonicalRate;
    for (std::size_t i = 0; i < n; ++i) x[i] += std::sin(w * static_cast<double>(i) + ph);
  }
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  for (auto& v : x) v *= peak / m;
  return x;
}

inline AudioBuffer sine(double freq_hz, double amplitude, std::size_t n,
                        int fs = kCanonicalRate) {
  AudioBuffer a{std::vector<double>(n), fs};
  for (std::size_t i = 0; i < n; ++i)
    a.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs);
  return a;
}

inline AudioBuffer random_buffer(std::uint64_t seed, std::size_t n, double amp = 0.9) {
  std::mt19937_64 rng(seed);
  AudioBuffer a{std::vector<double>(n), kCanonicalRate};
  for (auto& v : a.samples) v = uniform(rng, -amp, amp);
  return a;
}

}  // namespace hvc::testing
