#include "hvc/vad.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hvc/dsp.h"
#include "hvc/errors.h"

namespace hvc {

std::vector<SpeechRegion> detect_speech(const AudioBuffer& audio, const VadConfig& config) {
  require_canonical_rate(audio, "VAD");
  if (config.hangover_frames < 0) throw ParameterError("hangover must be >= 0");
  const double frame_exact = config.frame_ms * audio.sample_rate / 1000.0;
  const auto frame_len = static_cast<std::size_t>(std::max(1.0, std::round(frame_exact)));
  const std::size_t n = audio.size();
  if (n == 0) return {};
  const std::size_t n_frames = (n + frame_len - 1) / frame_len;

  const bool band_limit =
      config.band_high_hz > 0.0 && config.band_high_hz < audio.sample_rate / 2.0;
  const AudioBuffer narrow = band_limit ? low_pass(audio, config.band_high_hz) : audio;
  const auto& x = narrow.samples;

  std::vector<double> energy(n_frames, 0.0);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * frame_len;
    const std::size_t end = std::min(n, start + frame_len);
    double acc = 0.0;
    for (std::size_t i = start; i < end; ++i) acc += x[i] * x[i];
    energy[f] = acc / static_cast<double>(end - start);
  }

  std::vector<double> sorted = energy;
  const auto rank = static_cast<std::size_t>(
      std::floor(config.floor_percentile / 100.0 * static_cast<double>(n_frames - 1)));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank),
                   sorted.end());
  const double floor = std::min(sorted[rank], std::pow(10.0, config.max_floor_dbfs / 10.0));
  const double threshold = floor * std::pow(10.0, config.margin_db / 10.0);
  const double min_energy = std::pow(10.0, config.min_energy_dbfs / 10.0);

  std::vector<bool> raw(n_frames, false);
  for (std::size_t f = 0; f < n_frames; ++f)
    raw[f] = energy[f] > threshold && energy[f] > min_energy;

  // Runs shorter than the minimum region are clicks or filter spill; only
  // confirmed runs get the hangover.
  const double frame_ms_exact = 1000.0 * static_cast<double>(frame_len) / audio.sample_rate;
  const auto min_frames = static_cast<std::size_t>(
      std::max(1.0, std::ceil(config.min_region_ms / frame_ms_exact - 1e-9)));
  std::vector<bool> active(n_frames, false);
  for (std::size_t f = 0; f < n_frames;) {
    if (!raw[f]) {
      ++f;
      continue;
    }
    std::size_t g = f;
    while (g < n_frames && raw[g]) ++g;
    if (g - f >= min_frames) {
      const std::size_t stop =
          std::min(n_frames, g + static_cast<std::size_t>(std::max(0, config.hangover_frames)));
      for (std::size_t k = f; k < stop; ++k) active[k] = true;
    }
    f = g;
  }

  const double duration = audio.duration_seconds();
  const double frame_s = static_cast<double>(frame_len) / audio.sample_rate;
  std::vector<SpeechRegion> regions;
  for (std::size_t f = 0; f < n_frames;) {
    if (!active[f]) {
      ++f;
      continue;
    }
    std::size_t g = f;
    while (g < n_frames && active[g]) ++g;
    SpeechRegion r{static_cast<double>(f) * frame_s,
                   std::min(duration, static_cast<double>(g) * frame_s)};
    regions.push_back(r);
    f = g;
  }
  return regions;
}

double overlap_seconds(const std::vector<SpeechRegion>& truth,
                       const std::vector<SpeechRegion>& detected) {
  double total = 0.0;
  for (const auto& t : truth)
    for (const auto& d : detected) {
      const double lo = std::max(t.start, d.start);
      const double hi = std::min(t.end, d.end);
      if (hi > lo) total += hi - lo;
    }
  return total;
}

std::string format_regions(const std::vector<SpeechRegion>& regions) {
  std::string out;
  char buf[64];
  for (const auto& r : regions) {
    std::snprintf(buf, sizeof buf, "%.3f\t%.3f\n", r.start, r.end);
    out += buf;
  }
  return out;
}

}  // namespace hvc
