#pragma once

#include <string>
#include <vector>

#include "hvc/audio_io.h"

namespace hvc {

enum class AnalysisWindow { kHamming, kRectangular };
enum class SpectrumKind { kPower, kMagnitude };

struct FeatureConfig {
  double frame_ms = 20.0;
  double hop_ms = 10.0;
  AnalysisWindow window = AnalysisWindow::kHamming;
  int n_mel_filters = 26;
  int n_coefficients = 13;
  double log_floor = 1e-10;
  bool include_dct = true;  // false yields MFSC (log mel energies)
  SpectrumKind spectrum = SpectrumKind::kPower;
  double pre_emphasis = 0.0;
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;  // 0 means Nyquist

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

// Throws ParameterError on an inconsistent configuration.
void validate(const FeatureConfig& config);

// Row-major frames x coefficients.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  FeatureConfig config;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Filter centres in Hz (n_filters values, strictly increasing).
std::vector<double> mel_centers(int n_filters, double f_min, double f_max);

// n_filters x (fft_size/2 + 1), row-major. Triangles with vertices equally
// spaced on the HTK mel scale, unit height at the centre frequency.
std::vector<double> mel_filterbank(int n_filters, std::size_t fft_size, int sample_rate,
                                   double f_min, double f_max);

std::size_t frame_count(std::size_t n_samples, std::size_t frame_len, std::size_t hop);

// Analysis-window coefficients (symmetric Hamming or all ones).
std::vector<double> analysis_window(AnalysisWindow kind, std::size_t length);

// Linear mel filterbank energies per frame (frames x n_mel_filters), before
// the log and DCT.
FeatureMatrix mel_energies(const AudioBuffer& audio, const FeatureConfig& config);

// MFCC (include_dct) or MFSC features of 16 kHz audio.
FeatureMatrix extract_features(const AudioBuffer& audio, const FeatureConfig& config = {});

// Orthonormal DCT-II keeping the first n_out coefficients, and its inverse
// (treating missing coefficients as zero).
std::vector<double> dct2_orthonormal(const std::vector<double>& x, std::size_t n_out);
std::vector<double> idct2_orthonormal(const std::vector<double>& c, std::size_t n);

// Mean Euclidean row distance over the frames both matrices share.
double feature_distance(const FeatureMatrix& a, const FeatureMatrix& b);

// One frame per line, space separated, 9 significant digits.
std::string format_feature_matrix(const FeatureMatrix& m);
FeatureMatrix parse_feature_matrix(const std::string& text);

}  // namespace hvc
