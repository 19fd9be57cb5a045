#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hvc/audio_io.h"

namespace hvc {

struct HfaComponent {
  double frequency_hz = 0.0;
  double amplitude = 0.0;

  friend bool operator==(const HfaComponent&, const HfaComponent&) = default;
};

// One point of the attack parameter space. Unset optionals mean the
// primitive is not applied.
struct PerturbationParams {
  std::optional<double> tdi_window_ms;
  std::optional<double> rpg_window_ms;
  std::uint64_t rpg_seed = 42;
  std::vector<HfaComponent> hfa_components;
  std::optional<double> ts_factor_percent;

  friend bool operator==(const PerturbationParams&, const PerturbationParams&) = default;
};

// max(1, round(ms * fs / 1000))
std::size_t window_samples(double window_ms, int sample_rate);

// Reverses every consecutive, non-overlapping window of window_ms. The
// trailing partial window is reversed at its own length.
AudioBuffer tdi(const AudioBuffer& audio, double window_ms);
AudioBuffer tdi_samples(const AudioBuffer& audio, std::size_t window);

struct RpgResult {
  AudioBuffer audio;
  // Largest imaginary part left by the inverse transforms, relative to the
  // output peak.
  double max_imag_residue = 0.0;
};

// Keeps each window's exact-length DFT magnitude and replaces the phase of
// every interior bin with a seeded uniform draw. DC and Nyquist stay as-is.
AudioBuffer rpg(const AudioBuffer& audio, double window_ms, std::uint64_t seed);
RpgResult rpg_detailed(const AudioBuffer& audio, std::size_t window, std::uint64_t seed);

struct HfaResult {
  AudioBuffer audio;
  // 1.0 unless the sum clipped and the whole signal was rescaled by 1/peak.
  double scale = 1.0;
};

HfaResult hfa(const AudioBuffer& audio, const std::vector<HfaComponent>& components);

// Nearest-sample decimation by factor/100 at an unchanged sample rate.
AudioBuffer ts(const AudioBuffer& audio, double factor_percent);

struct TdiStep {
  double window_ms;
};
struct RpgStep {
  double window_ms;
  std::uint64_t seed;
};
struct HfaStep {
  std::vector<HfaComponent> components;
};
struct TsStep {
  double factor_percent;
};
using PerturbationStep = std::variant<TdiStep, RpgStep, HfaStep, TsStep>;
using PerturbationChain = std::vector<PerturbationStep>;

// Canonical order TS -> TDI -> RPG -> HFA.
PerturbationChain chain_from_params(const PerturbationParams& params);

struct ChainOutput {
  AudioBuffer audio;
  double hfa_scale = 1.0;
};

// Validates every step against the buffer's rate, then applies in order.
ChainOutput apply_chain(const AudioBuffer& audio, const PerturbationChain& chain);
ChainOutput perturb(const AudioBuffer& audio, const PerturbationParams& params);

// Value lists per parameter. An empty list leaves that parameter unset.
struct ParamRanges {
  std::vector<double> tdi_window_ms;
  std::vector<double> rpg_window_ms;
  std::vector<std::vector<HfaComponent>> hfa_sets;
  std::vector<double> ts_factor_percent;
  std::uint64_t rpg_seed = 42;
};

// Cartesian product, tdi-major, then rpg, hfa, ts.
std::vector<PerturbationParams> expand_grid(const ParamRanges& ranges);

// start, start + step, ... up to stop inclusive (with a small tolerance for
// accumulated rounding).
std::vector<double> linear_schedule(double start, double stop, double step);

// The probe schedule 1.00 ms, 1.50 ms, ... (count points).
std::vector<double> default_window_schedule(std::size_t count = 10);

// Manifest encoding: tab-separated key=value fields.
std::string format_params(const PerturbationParams& params);
PerturbationParams parse_params(const std::string& text);

}  // namespace hvc
