#include "hvc/channel.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hvc/dsp.h"
#include "hvc/errors.h"

namespace hvc {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("bad value for " + key + ": '" + value + "'");
  }
}

}  // namespace

void validate(const ChannelConfig& config, int sample_rate) {
  const double nyquist = sample_rate / 2.0;
  if (!(config.band_low_hz >= 0.0) || !(config.band_low_hz < config.band_high_hz) ||
      config.band_high_hz > nyquist)
    throw ParameterError("channel band must satisfy 0 <= low < high <= Nyquist");
  if (std::isnan(config.snr_db)) throw ParameterError("snr_db is NaN");
  if (config.reverb) {
    const auto& r = *config.reverb;
    if (!(r.delay_ms > 0.0)) throw ParameterError("reverb delay must be positive");
    if (!(r.decay > 0.0 && r.decay < 1.0)) throw ParameterError("reverb decay must be in (0, 1)");
    if (r.taps < 0) throw ParameterError("reverb taps must be >= 0");
  }
  if (config.noise && config.noise->empty()) throw ParameterError("noise buffer is empty");
}

ChannelOutput simulate(const AudioBuffer& audio, const ChannelConfig& config) {
  validate(config, audio.sample_rate);
  AudioBuffer x = audio;

  const double nyquist = audio.sample_rate / 2.0;
  if (config.band_high_hz < nyquist) x = low_pass(x, config.band_high_hz);
  if (config.band_low_hz > 0.0) x = high_pass(x, config.band_low_hz);

  if (config.reverb && config.reverb->taps > 0) {
    const auto& r = *config.reverb;
    const auto delay = static_cast<std::size_t>(
        std::max(1.0, std::round(r.delay_ms * audio.sample_rate / 1000.0)));
    std::vector<double> y = x.samples;
    double gain = 1.0;
    for (int t = 1; t <= r.taps; ++t) {
      gain *= r.decay;
      const std::size_t shift = delay * static_cast<std::size_t>(t);
      for (std::size_t i = shift; i < y.size(); ++i) y[i] += gain * x.samples[i - shift];
    }
    x.samples = std::move(y);
  }

  if (std::isfinite(config.snr_db) && !x.empty()) {
    std::vector<double> noise(x.size());
    if (config.noise) {
      const auto& src = config.noise->samples;
      for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = src[i % src.size()];
    } else {
      DeterministicRng rng(config.noise_seed);
      for (auto& v : noise) v = rng.gaussian();
    }
    const double signal_power = mean_power(x.samples);
    const double noise_power = mean_power(noise);
    if (signal_power > 0.0 && noise_power > 0.0) {
      // Scale the realized noise so the SNR is exact, not just in expectation.
      const double target = signal_power / std::pow(10.0, config.snr_db / 10.0);
      const double g = std::sqrt(target / noise_power);
      for (std::size_t i = 0; i < x.size(); ++i) x.samples[i] += g * noise[i];
    }
  }

  ChannelOutput out{std::move(x), 1.0};
  double peak = 0.0;
  for (double v : out.audio.samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0) {
    out.scale = 1.0 / peak;
    for (auto& v : out.audio.samples) v *= out.scale;
  }
  return out;
}

ChannelConfig channel_preset(const std::string& name, int sample_rate) {
  ChannelConfig c;
  c.band_high_hz = sample_rate / 2.0;
  if (name == "transparent") return c;
  if (name == "harsh") {
    // Consumer speaker into a phone microphone with a noise source nearby.
    c.band_low_hz = 100.0;
    c.band_high_hz = std::min(7000.0, sample_rate / 2.0);
    c.snr_db = 20.0;
    c.reverb = ReverbConfig{};
    return c;
  }
  throw ParameterError("unknown channel preset '" + name + "'");
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("line " + std::to_string(line_no) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

ChannelConfig parse_channel_config(const std::string& text, int sample_rate) {
  ChannelConfig c = channel_preset("transparent", sample_rate);
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "band_low") {
      c.band_low_hz = parse_number(key, value);
    } else if (key == "band_high") {
      c.band_high_hz = parse_number(key, value);
    } else if (key == "snr_db") {
      c.snr_db = parse_number(key, value);
    } else if (key == "seed") {
      c.noise_seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "reverb_delay_ms") {
      if (!c.reverb) c.reverb = ReverbConfig{};
      c.reverb->delay_ms = parse_number(key, value);
    } else if (key == "reverb_decay") {
      if (!c.reverb) c.reverb = ReverbConfig{};
      c.reverb->decay = parse_number(key, value);
    } else if (key == "reverb_taps") {
      if (!c.reverb) c.reverb = ReverbConfig{};
      c.reverb->taps = static_cast<int>(parse_number(key, value));
    } else {
      throw ParameterError("unknown channel key '" + key + "'");
    }
  }
  validate(c, sample_rate);
  return c;
}

}  // namespace hvc
