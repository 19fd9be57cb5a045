#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hvc/audio_io.h"

namespace hvc {

struct Frame {
  std::size_t start = 0;
  std::vector<double> samples;
};

// One-sided spectrum, bins 0..fft_size/2 inclusive. Bin k sits at
// k * sample_rate / fft_size Hz (sample_rate is 0 when unknown).
struct ComplexSpectrum {
  std::vector<std::complex<double>> bins;
  std::size_t fft_size = 0;
  int sample_rate = 0;
};

std::vector<Frame> frame_signal(const AudioBuffer& audio, std::size_t window_len,
                                std::size_t hop, bool pad_last);

std::size_t next_pow2(std::size_t n);

// In-place radix-2 complex FFT; size must be a power of two.
void fft_inplace(std::span<std::complex<double>> data, bool inverse);

// Zero-pads to the next power of two.
ComplexSpectrum fft_real(std::span<const double> frame, int sample_rate = 0);

// Output length is spectrum.fft_size. Throws ContractError when the DC or
// Nyquist bin carries an imaginary part.
std::vector<double> inverse_fft_real(const ComplexSpectrum& spectrum);

// Exact-length DFT of a real frame (no zero padding), bins 0..n/2. Uses the
// radix-2 kernel directly for power-of-two lengths and a chirp-z transform
// otherwise.
ComplexSpectrum dft_real_exact(std::span<const double> frame, int sample_rate = 0);

// Full complex inverse of a one-sided spectrum of fft_size points, Hermitian
// extended. Returns the complex time signal so callers can inspect the
// imaginary residue.
std::vector<std::complex<double>> inverse_dft_hermitian(const ComplexSpectrum& spectrum);

std::vector<double> magnitude(const ComplexSpectrum& spectrum);

// Linear-phase windowed-sinc (Hamming) low-pass, delay compensated so the
// output lines up with the input. Transition band spans 0.8..1.2 * cutoff.
AudioBuffer low_pass(const AudioBuffer& audio, double cutoff_hz);

// Complement of low_pass: x - low_pass(x, cutoff).
AudioBuffer high_pass(const AudioBuffer& audio, double cutoff_hz);

std::vector<double> low_pass_kernel(double cutoff_hz, int sample_rate);

// 10 log10(P(reference) / P(test - reference)). +infinity when the residual
// is exactly zero.
double measure_snr(const AudioBuffer& reference, const AudioBuffer& test);

double mean_power(std::span<const double> x);

// Seeded generator whose outputs are fixed across standard library
// implementations (the std distributions are not).
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double gaussian();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hvc
