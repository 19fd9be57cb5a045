#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "hvc/audio_io.h"

namespace hvc {

struct ReverbConfig {
  double delay_ms = 15.0;
  double decay = 0.5;  // per-tap gain ratio, in (0, 1)
  int taps = 4;
};

// Over-the-air stand-in: band limiting, sparse exponential reverb, then
// seeded additive noise at a target SNR.
struct ChannelConfig {
  double band_low_hz = 0.0;
  double band_high_hz = 8000.0;
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t noise_seed = 42;
  std::optional<ReverbConfig> reverb;
  // Replaces the white Gaussian noise when set; tiled to length.
  std::optional<AudioBuffer> noise;
};

struct ChannelOutput {
  AudioBuffer audio;
  double scale = 1.0;  // < 1 when the result was renormalized to peak 1
};

void validate(const ChannelConfig& config, int sample_rate);

ChannelOutput simulate(const AudioBuffer& audio, const ChannelConfig& config);

// "transparent" or "harsh" at the given rate.
ChannelConfig channel_preset(const std::string& name, int sample_rate = kCanonicalRate);

// Keys: band_low, band_high, snr_db (number or "inf"), seed, reverb_delay_ms,
// reverb_decay, reverb_taps. Any reverb key enables reverb.
ChannelConfig parse_channel_config(const std::string& text, int sample_rate = kCanonicalRate);

// `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace hvc
