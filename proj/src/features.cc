#include "hvc/features.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "hvc/dsp.h"
#include "hvc/errors.h"

namespace hvc {
namespace {

std::size_t ms_to_samples(double ms, int sample_rate) {
  const double n = std::round(ms * sample_rate / 1000.0);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

double resolved_f_max(const FeatureConfig& config, int sample_rate) {
  return config.f_max_hz > 0.0 ? config.f_max_hz : sample_rate / 2.0;
}

}  // namespace

void validate(const FeatureConfig& config) {
  if (!(config.frame_ms > 0.0) || !(config.hop_ms > 0.0))
    throw ParameterError("frame_ms and hop_ms must be positive");
  if (config.n_mel_filters < 1) throw ParameterError("need at least one mel filter");
  if (config.n_coefficients < 1 || config.n_coefficients > config.n_mel_filters)
    throw ParameterError("n_coefficients must be in [1, n_mel_filters]");
  if (!(config.log_floor > 0.0)) throw ParameterError("log_floor must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_centers(int n_filters, double f_min, double f_max) {
  const double lo = hz_to_mel(f_min);
  const double step = (hz_to_mel(f_max) - lo) / (n_filters + 1);
  std::vector<double> out(static_cast<std::size_t>(n_filters));
  for (int i = 0; i < n_filters; ++i) out[i] = mel_to_hz(lo + step * (i + 1));
  return out;
}

std::vector<double> mel_filterbank(int n_filters, std::size_t fft_size, int sample_rate,
                                   double f_min, double f_max) {
  if (n_filters < 1) throw ParameterError("need at least one mel filter");
  if (!(f_min >= 0.0) || !(f_min < f_max) || f_max > sample_rate / 2.0)
    throw ParameterError("mel filterbank band must satisfy 0 <= f_min < f_max <= Nyquist");

  const double lo = hz_to_mel(f_min);
  const double step = (hz_to_mel(f_max) - lo) / (n_filters + 1);
  std::vector<double> edges(static_cast<std::size_t>(n_filters) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(lo + step * static_cast<double>(i));
  edges.front() = f_min;
  edges.back() = f_max;

  const std::size_t n_bins = fft_size / 2 + 1;
  std::vector<double> bank(static_cast<std::size_t>(n_filters) * n_bins, 0.0);
  for (int m = 0; m < n_filters; ++m) {
    const double left = edges[m];
    const double centre = edges[m + 1];
    const double right = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
      double w = 0.0;
      if (f > left && f <= centre)
        w = (f - left) / (centre - left);
      else if (f > centre && f < right)
        w = (right - f) / (right - centre);
      bank[static_cast<std::size_t>(m) * n_bins + k] = w;
    }
  }
  return bank;
}

std::size_t frame_count(std::size_t n_samples, std::size_t frame_len, std::size_t hop) {
  if (n_samples < frame_len) return 0;
  return (n_samples - frame_len) / hop + 1;
}

std::vector<double> analysis_window(AnalysisWindow kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == AnalysisWindow::kHamming && length > 1) {
    for (std::size_t n = 0; n < length; ++n)
      w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                    static_cast<double>(length - 1));
  }
  return w;
}

FeatureMatrix mel_energies(const AudioBuffer& audio, const FeatureConfig& config) {
  validate(config);
  require_canonical_rate(audio, "feature extraction");
  const std::size_t frame_len = ms_to_samples(config.frame_ms, audio.sample_rate);
  const std::size_t hop = ms_to_samples(config.hop_ms, audio.sample_rate);
  if (audio.size() < frame_len)
    throw EmptyInputError("audio is shorter than one analysis frame");

  std::vector<double> x = audio.samples;
  if (config.pre_emphasis != 0.0) {
    for (std::size_t n = x.size(); n-- > 1;) x[n] -= config.pre_emphasis * x[n - 1];
  }

  const std::size_t fft_size = next_pow2(frame_len);
  const std::size_t n_bins = fft_size / 2 + 1;
  const auto n_filters = static_cast<std::size_t>(config.n_mel_filters);
  const auto bank = mel_filterbank(config.n_mel_filters, fft_size, audio.sample_rate,
                                   config.f_min_hz, resolved_f_max(config, audio.sample_rate));
  const auto window = analysis_window(config.window, frame_len);

  FeatureMatrix out;
  out.rows = frame_count(x.size(), frame_len, hop);
  out.cols = n_filters;
  out.config = config;
  out.values.resize(out.rows * out.cols);

  std::vector<double> frame(frame_len);
  std::vector<double> spectrum(n_bins);
  for (std::size_t r = 0; r < out.rows; ++r) {
    const std::size_t start = r * hop;
    for (std::size_t n = 0; n < frame_len; ++n) frame[n] = x[start + n] * window[n];
    const auto mags = magnitude(fft_real(frame, audio.sample_rate));
    for (std::size_t k = 0; k < n_bins; ++k)
      spectrum[k] = config.spectrum == SpectrumKind::kPower ? mags[k] * mags[k] : mags[k];
    for (std::size_t m = 0; m < n_filters; ++m) {
      const double* weights = bank.data() + m * n_bins;
      double e = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) e += weights[k] * spectrum[k];
      out.values[r * n_filters + m] = e;
    }
  }
  return out;
}

FeatureMatrix extract_features(const AudioBuffer& audio, const FeatureConfig& config) {
  FeatureMatrix energies = mel_energies(audio, config);
  for (auto& e : energies.values) e = std::log(std::max(e, config.log_floor));
  if (!config.include_dct) return energies;

  const auto n_coeff = static_cast<std::size_t>(config.n_coefficients);
  FeatureMatrix out;
  out.rows = energies.rows;
  out.cols = n_coeff;
  out.config = config;
  out.values.reserve(out.rows * n_coeff);
  std::vector<double> row(energies.cols);
  for (std::size_t r = 0; r < energies.rows; ++r) {
    std::copy_n(energies.row(r), energies.cols, row.begin());
    const auto c = dct2_orthonormal(row, n_coeff);
    out.values.insert(out.values.end(), c.begin(), c.end());
  }
  return out;
}

std::vector<double> dct2_orthonormal(const std::vector<double>& x, std::size_t n_out) {
  const std::size_t n = x.size();
  std::vector<double> c(std::min(n_out, n), 0.0);
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < c.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::cos(std::numbers::pi * static_cast<double>(k) *
                             (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n)));
    c[k] = (k == 0 ? s0 : sk) * acc;
  }
  return c;
}

std::vector<double> idct2_orthonormal(const std::vector<double>& c, std::size_t n) {
  std::vector<double> x(n, 0.0);
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < std::min(c.size(), n); ++k)
      acc += (k == 0 ? s0 : sk) * c[k] *
             std::cos(std::numbers::pi * static_cast<double>(k) *
                      (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n)));
    x[i] = acc;
  }
  return x;
}

double feature_distance(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (!(a.config == b.config) || a.cols != b.cols)
    throw ParameterError("feature matrices come from different configurations");
  const std::size_t rows = std::min(a.rows, b.rows);
  if (rows == 0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < a.cols; ++c) {
      const double d = a.at(r, c) - b.at(r, c);
      sq += d * d;
    }
    total += std::sqrt(sq);
  }
  return total / static_cast<double>(rows);
}

std::string format_feature_matrix(const FeatureMatrix& m) {
  std::string out;
  char buf[32];
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", m.at(r, c));
      if (c) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

FeatureMatrix parse_feature_matrix(const std::string& text) {
  FeatureMatrix m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t cols = 0;
    double v = 0.0;
    while (fields >> v) {
      m.values.push_back(v);
      ++cols;
    }
    if (!fields.eof()) throw FormatError("bad number in feature matrix line");
    if (m.rows == 0) m.cols = cols;
    if (cols != m.cols) throw FormatError("ragged feature matrix");
    ++m.rows;
  }
  return m;
}

}  // namespace hvc
