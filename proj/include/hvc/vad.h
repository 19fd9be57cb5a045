#pragma once

#include <string>
#include <vector>

#include "hvc/audio_io.h"

namespace hvc {

struct SpeechRegion {
  double start = 0.0;  // seconds
  double end = 0.0;

  friend bool operator==(const SpeechRegion&, const SpeechRegion&) = default;
};

// Adaptive-energy detector on the narrowband speech channel (energy is
// measured after a low-pass at band_high_hz, 0 = full band). A frame is active
// when its mean-square energy exceeds the noise floor by margin_db. The floor
// is a low percentile of the file's frame energies, capped at max_floor_dbfs
// so a file that is loud throughout still registers as active. Active runs
// shorter than min_region_ms are dropped; the rest are extended by the
// hangover.
struct VadConfig {
  double band_high_hz = 4000.0;
  double frame_ms = 10.0;
  double margin_db = 9.0;
  int hangover_frames = 4;
  double min_region_ms = 30.0;
  double floor_percentile = 10.0;
  double max_floor_dbfs = -40.0;
  // Frames at or below this energy never count as speech.
  double min_energy_dbfs = -100.0;
};

std::vector<SpeechRegion> detect_speech(const AudioBuffer& audio, const VadConfig& config = {});

// Total seconds of `truth` covered by `detected`.
double overlap_seconds(const std::vector<SpeechRegion>& truth,
                       const std::vector<SpeechRegion>& detected);

// "start<TAB>end" per line, seconds with millisecond precision.
std::string format_regions(const std::vector<SpeechRegion>& regions);

}  // namespace hvc
