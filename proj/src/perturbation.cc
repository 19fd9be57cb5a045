#include "hvc/perturbation.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hvc/dsp.h"
#include "hvc/errors.h"

namespace hvc {
namespace {

void require_window(double window_ms, const char* what) {
  if (!std::isfinite(window_ms) || window_ms <= 0.0)
    throw ParameterError(std::string(what) + " window must be a positive number of ms");
}

void require_ts_factor(double factor) {
  if (!std::isfinite(factor) || factor < 100.0)
    throw ParameterError("TS factor must be a finite percentage >= 100");
}

void require_hfa(const std::vector<HfaComponent>& components, int sample_rate) {
  const double nyquist = sample_rate / 2.0;
  for (const auto& c : components) {
    if (!std::isfinite(c.frequency_hz) || c.frequency_hz < 0.0 || c.frequency_hz >= nyquist)
      throw ParameterError("HFA frequency must lie in [0, Nyquist)");
    if (!std::isfinite(c.amplitude) || c.amplitude < 0.0)
      throw ParameterError("HFA amplitude must be finite and >= 0");
  }
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParameterError("bad number '" + s + "'");
  return v;
}

}  // namespace

std::size_t window_samples(double window_ms, int sample_rate) {
  const double n = std::round(window_ms * sample_rate / 1000.0);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

AudioBuffer tdi(const AudioBuffer& audio, double window_ms) {
  require_window(window_ms, "TDI");
  return tdi_samples(audio, window_samples(window_ms, audio.sample_rate));
}

AudioBuffer tdi_samples(const AudioBuffer& audio, std::size_t window) {
  if (window == 0) throw ParameterError("TDI window must be at least one sample");
  AudioBuffer out = audio;
  auto& x = out.samples;
  for (std::size_t start = 0; start < x.size(); start += window) {
    const std::size_t end = std::min(x.size(), start + window);
    std::reverse(x.begin() + static_cast<std::ptrdiff_t>(start),
                 x.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

AudioBuffer rpg(const AudioBuffer& audio, double window_ms, std::uint64_t seed) {
  require_window(window_ms, "RPG");
  return rpg_detailed(audio, window_samples(window_ms, audio.sample_rate), seed).audio;
}

RpgResult rpg_detailed(const AudioBuffer& audio, std::size_t window, std::uint64_t seed) {
  if (window == 0) throw ParameterError("RPG window must be at least one sample");
  RpgResult result{AudioBuffer{{}, audio.sample_rate}, 0.0};
  auto& y = result.audio.samples;
  y.reserve(audio.size());
  DeterministicRng rng(seed);
  double max_imag = 0.0;
  double peak = 0.0;

  const std::span<const double> x(audio.samples);
  for (std::size_t start = 0; start < x.size(); start += window) {
    const std::size_t len = std::min(window, x.size() - start);
    auto spectrum = dft_real_exact(x.subspan(start, len), audio.sample_rate);
    // Interior bins exclude DC and, for even lengths, the Nyquist bin.
    const std::size_t interior_end = len % 2 == 0 ? len / 2 : len / 2 + 1;
    for (std::size_t k = 1; k < interior_end; ++k) {
      const double mag = std::abs(spectrum.bins[k]);
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      spectrum.bins[k] = {mag * std::cos(theta), mag * std::sin(theta)};
    }
    for (const auto& v : inverse_dft_hermitian(spectrum)) {
      y.push_back(v.real());
      max_imag = std::max(max_imag, std::abs(v.imag()));
      peak = std::max(peak, std::abs(v.real()));
    }
  }
  result.max_imag_residue = peak > 0.0 ? max_imag / peak : max_imag;
  return result;
}

HfaResult hfa(const AudioBuffer& audio, const std::vector<HfaComponent>& components) {
  require_hfa(components, audio.sample_rate);
  HfaResult out{audio, 1.0};
  auto& y = out.audio.samples;
  const double fs = audio.sample_rate;
  for (const auto& c : components) {
    if (c.amplitude == 0.0) continue;
    const double w = 2.0 * std::numbers::pi * c.frequency_hz / fs;
    for (std::size_t n = 0; n < y.size(); ++n)
      y[n] += c.amplitude * std::sin(w * static_cast<double>(n));
  }
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  if (peak > 1.0) {
    out.scale = 1.0 / peak;
    for (auto& v : y) v *= out.scale;
  }
  return out;
}

AudioBuffer ts(const AudioBuffer& audio, double factor_percent) {
  require_ts_factor(factor_percent);
  AudioBuffer out{{}, audio.sample_rate};
  const double stride = factor_percent / 100.0;
  const auto n = audio.size();
  out.samples.reserve(static_cast<std::size_t>(std::ceil(static_cast<double>(n) / stride)) + 1);
  for (std::size_t k = 0;; ++k) {
    const double pos = std::round(static_cast<double>(k) * stride);
    if (pos >= static_cast<double>(n)) break;
    out.samples.push_back(audio.samples[static_cast<std::size_t>(pos)]);
  }
  return out;
}

PerturbationChain chain_from_params(const PerturbationParams& params) {
  PerturbationChain chain;
  if (params.ts_factor_percent) chain.emplace_back(TsStep{*params.ts_factor_percent});
  if (params.tdi_window_ms) chain.emplace_back(TdiStep{*params.tdi_window_ms});
  if (params.rpg_window_ms)
    chain.emplace_back(RpgStep{*params.rpg_window_ms, params.rpg_seed});
  if (!params.hfa_components.empty()) chain.emplace_back(HfaStep{params.hfa_components});
  return chain;
}

ChainOutput apply_chain(const AudioBuffer& audio, const PerturbationChain& chain) {
  for (const auto& step : chain) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, TdiStep>) require_window(s.window_ms, "TDI");
          if constexpr (std::is_same_v<T, RpgStep>) require_window(s.window_ms, "RPG");
          if constexpr (std::is_same_v<T, HfaStep>) require_hfa(s.components, audio.sample_rate);
          if constexpr (std::is_same_v<T, TsStep>) require_ts_factor(s.factor_percent);
        },
        step);
  }

  ChainOutput out{audio, 1.0};
  for (const auto& step : chain) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, TdiStep>) {
            out.audio = tdi(out.audio, s.window_ms);
          } else if constexpr (std::is_same_v<T, RpgStep>) {
            out.audio = rpg(out.audio, s.window_ms, s.seed);
          } else if constexpr (std::is_same_v<T, HfaStep>) {
            auto r = hfa(out.audio, s.components);
            out.audio = std::move(r.audio);
            out.hfa_scale *= r.scale;
          } else {
            out.audio = ts(out.audio, s.factor_percent);
          }
        },
        step);
  }
  return out;
}

ChainOutput perturb(const AudioBuffer& audio, const PerturbationParams& params) {
  return apply_chain(audio, chain_from_params(params));
}

std::vector<PerturbationParams> expand_grid(const ParamRanges& ranges) {
  auto or_unset = [](const std::vector<double>& v) {
    std::vector<std::optional<double>> out;
    for (double x : v) {
      if (!std::isfinite(x)) throw ParameterError("grid values must be finite");
      out.emplace_back(x);
    }
    if (out.empty()) out.emplace_back(std::nullopt);
    return out;
  };
  const auto tdis = or_unset(ranges.tdi_window_ms);
  const auto rpgs = or_unset(ranges.rpg_window_ms);
  const auto tss = or_unset(ranges.ts_factor_percent);
  auto hfas = ranges.hfa_sets;
  if (hfas.empty()) hfas.emplace_back();

  std::vector<PerturbationParams> grid;
  grid.reserve(tdis.size() * rpgs.size() * hfas.size() * tss.size());
  for (const auto& t : tdis)
    for (const auto& r : rpgs)
      for (const auto& h : hfas)
        for (const auto& s : tss) {
          PerturbationParams p;
          p.tdi_window_ms = t;
          p.rpg_window_ms = r;
          p.rpg_seed = ranges.rpg_seed;
          p.hfa_components = h;
          p.ts_factor_percent = s;
          grid.push_back(std::move(p));
        }
  return grid;
}

std::vector<double> linear_schedule(double start, double stop, double step) {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step) || step <= 0.0)
    throw ParameterError("schedule needs finite start/stop and a positive step");
  if (stop < start) throw ParameterError("schedule stop precedes start");
  std::vector<double> out;
  const double span = (stop - start) / step;
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

std::vector<double> default_window_schedule(std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(1.0 + 0.5 * static_cast<double>(i));
  return out;
}

std::string format_params(const PerturbationParams& params) {
  std::vector<std::string> fields;
  if (params.tdi_window_ms) fields.push_back("tdi_ms=" + shortest(*params.tdi_window_ms));
  if (params.rpg_window_ms) fields.push_back("rpg_ms=" + shortest(*params.rpg_window_ms));
  fields.push_back("rpg_seed=" + std::to_string(params.rpg_seed));
  if (!params.hfa_components.empty()) {
    std::string h = "hfa=";
    for (std::size_t i = 0; i < params.hfa_components.size(); ++i) {
      if (i) h += ',';
      h += shortest(params.hfa_components[i].frequency_hz) + ':' +
           shortest(params.hfa_components[i].amplitude);
    }
    fields.push_back(h);
  }
  if (params.ts_factor_percent) fields.push_back("ts=" + shortest(*params.ts_factor_percent));

  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += '\t';
    out += fields[i];
  }
  return out;
}

PerturbationParams parse_params(const std::string& text) {
  PerturbationParams p;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, '\t')) {
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParameterError("manifest field without '=': " + field);
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "tdi_ms") {
      p.tdi_window_ms = parse_double(value);
    } else if (key == "rpg_ms") {
      p.rpg_window_ms = parse_double(value);
    } else if (key == "rpg_seed") {
      p.rpg_seed = std::stoull(value);
    } else if (key == "ts") {
      p.ts_factor_percent = parse_double(value);
    } else if (key == "hfa") {
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ParameterError("HFA component needs F:A");
        p.hfa_components.push_back(
            {parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1))});
      }
    } else {
      throw ParameterError("unknown manifest key '" + key + "'");
    }
  }
  return p;
}

}  // namespace hvc
