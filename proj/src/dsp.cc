#include "hvc/dsp.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "hvc/errors.h"

namespace hvc {
namespace {

using cd = std::complex<double>;

// Arbitrary-length complex DFT via the chirp-z (Bluestein) identity
// jk = (j^2 + k^2 - (k - j)^2) / 2, evaluated with power-of-two FFTs.
std::vector<cd> dft_bluestein(std::span<const cd> x, bool inverse) {
  const std::size_t n = x.size();
  const std::size_t m = next_pow2(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;

  std::vector<cd> chirp(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Reduce j^2 mod 2n so the angle stays small and accurate.
    const auto j2 = static_cast<double>((static_cast<std::uint64_t>(j) * j) % (2 * n));
    const double angle = sign * std::numbers::pi * j2 / static_cast<double>(n);
    chirp[j] = cd(std::cos(angle), std::sin(angle));
  }

  std::vector<cd> a(m), b(m);
  for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * chirp[j];
  b[0] = std::conj(chirp[0]);
  for (std::size_t j = 1; j < n; ++j) b[j] = b[m - j] = std::conj(chirp[j]);

  fft_inplace(a, false);
  fft_inplace(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_inplace(a, true);

  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  return out;
}

// DFT of any length; the inverse is scaled by 1/n like fft_inplace.
std::vector<cd> dft_any(std::vector<cd> x, bool inverse) {
  if (x.empty()) return x;
  if (std::has_single_bit(x.size())) {
    fft_inplace(x, inverse);
    return x;
  }
  auto out = dft_bluestein(x, inverse);
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(out.size());
    for (auto& v : out) v *= scale;
  }
  return out;
}

double imag_tolerance(const ComplexSpectrum& s) {
  double peak = 0.0;
  for (const auto& b : s.bins) peak = std::max(peak, std::abs(b));
  return 1e-9 * std::max(1.0, peak);
}

void check_real_edges(const ComplexSpectrum& s) {
  if (s.bins.empty()) return;
  const double tol = imag_tolerance(s);
  if (std::abs(s.bins.front().imag()) > tol)
    throw ContractError("DC bin must be real");
  if (s.fft_size % 2 == 0 && std::abs(s.bins.back().imag()) > tol)
    throw ContractError("Nyquist bin must be real");
}

std::vector<cd> hermitian_extend(const ComplexSpectrum& s) {
  const std::size_t n = s.fft_size;
  if (s.bins.size() != n / 2 + 1)
    throw ContractError("spectrum bin count does not match fft_size");
  std::vector<cd> full(n);
  for (std::size_t k = 0; k < s.bins.size(); ++k) full[k] = s.bins[k];
  for (std::size_t k = s.bins.size(); k < n; ++k) full[k] = std::conj(s.bins[n - k]);
  return full;
}

std::vector<double> fir_same(std::span<const double> x, std::span<const double> h) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t taps = static_cast<std::ptrdiff_t>(h.size());
  const std::ptrdiff_t delay = taps / 2;
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    // y[i] = sum_t h[t] * x[i + delay - t]
    const std::ptrdiff_t t_lo = std::max<std::ptrdiff_t>(0, i + delay - (n - 1));
    const std::ptrdiff_t t_hi = std::min<std::ptrdiff_t>(taps - 1, i + delay);
    double acc = 0.0;
    for (std::ptrdiff_t t = t_lo; t <= t_hi; ++t) acc += h[t] * x[i + delay - t];
    y[i] = acc;
  }
  return y;
}

}  // namespace

std::vector<Frame> frame_signal(const AudioBuffer& audio, std::size_t window_len,
                                std::size_t hop, bool pad_last) {
  if (window_len == 0 || hop == 0)
    throw ParameterError("window length and hop must be at least 1");
  std::vector<Frame> frames;
  const auto& x = audio.samples;
  for (std::size_t start = 0; start < x.size(); start += hop) {
    const std::size_t end = std::min(x.size(), start + window_len);
    Frame f{start, std::vector<double>(x.begin() + start, x.begin() + end)};
    if (end - start < window_len && pad_last) f.samples.resize(window_len, 0.0);
    frames.push_back(std::move(f));
    if (end == x.size()) break;
  }
  return frames;
}

std::size_t next_pow2(std::size_t n) { return n <= 1 ? 1 : std::bit_ceil(n); }

void fft_inplace(std::span<std::complex<double>> data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  if (!std::has_single_bit(n)) throw ParameterError("FFT size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(len);
      const cd w(std::cos(angle), std::sin(angle));
      for (std::size_t i = 0; i < n; i += len) {
        const cd u = data[i + k];
        const cd v = data[i + k + half] * w;
        data[i + k] = u + v;
        data[i + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : data) v *= scale;
  }
}

ComplexSpectrum fft_real(std::span<const double> frame, int sample_rate) {
  if (frame.empty()) throw EmptyInputError("fft_real needs a nonempty frame");
  const std::size_t n = next_pow2(frame.size());
  std::vector<cd> buf(n);
  std::copy(frame.begin(), frame.end(), buf.begin());
  fft_inplace(buf, false);
  ComplexSpectrum s;
  s.fft_size = n;
  s.sample_rate = sample_rate;
  s.bins.assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n / 2 + 1));
  return s;
}

std::vector<double> inverse_fft_real(const ComplexSpectrum& spectrum) {
  if (!std::has_single_bit(spectrum.fft_size))
    throw ContractError("fft_size must be a power of two");
  check_real_edges(spectrum);
  auto full = hermitian_extend(spectrum);
  fft_inplace(full, true);
  std::vector<double> out(full.size());
  std::transform(full.begin(), full.end(), out.begin(), [](cd v) { return v.real(); });
  return out;
}

ComplexSpectrum dft_real_exact(std::span<const double> frame, int sample_rate) {
  if (frame.empty()) throw EmptyInputError("dft_real_exact needs a nonempty frame");
  std::vector<cd> buf(frame.begin(), frame.end());
  buf = dft_any(std::move(buf), false);
  ComplexSpectrum s;
  s.fft_size = frame.size();
  s.sample_rate = sample_rate;
  s.bins.assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(frame.size() / 2 + 1));
  // Real input: the DC (and even-length Nyquist) bins are real by definition.
  s.bins.front().imag(0.0);
  if (frame.size() % 2 == 0) s.bins.back().imag(0.0);
  return s;
}

std::vector<std::complex<double>> inverse_dft_hermitian(const ComplexSpectrum& spectrum) {
  check_real_edges(spectrum);
  return dft_any(hermitian_extend(spectrum), true);
}

std::vector<double> magnitude(const ComplexSpectrum& spectrum) {
  std::vector<double> out(spectrum.bins.size());
  std::transform(spectrum.bins.begin(), spectrum.bins.end(), out.begin(),
                 [](cd v) { return std::hypot(v.real(), v.imag()); });
  return out;
}

std::vector<double> low_pass_kernel(double cutoff_hz, int sample_rate) {
  const double fc = cutoff_hz / sample_rate;  // cycles per sample
  // Order 4 * fs / transition width with the transition spanning 0.4 * cutoff.
  auto taps = static_cast<std::size_t>(std::llround(4.0 / (0.4 * fc)));
  if (taps % 2 == 0) ++taps;
  const std::size_t mid = taps / 2;
  std::vector<double> h(taps);
  // Evaluated on one half and mirrored so the phase is exactly linear.
  for (std::size_t i = 0; i <= mid; ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(mid);
    const double arg = 2.0 * fc * t;
    const double sinc =
        t == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double window =
        taps == 1 ? 1.0
                  : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                           static_cast<double>(taps - 1));
    h[i] = h[taps - 1 - i] = 2.0 * fc * sinc * window;
  }
  double sum = 0.0;
  for (double v : h) sum += v;
  for (auto& v : h) v /= sum;
  return h;
}

AudioBuffer low_pass(const AudioBuffer& audio, double cutoff_hz) {
  const double nyquist = audio.sample_rate / 2.0;
  if (!(cutoff_hz > 0.0) || cutoff_hz > nyquist)
    throw ParameterError("low_pass cutoff must lie in (0, sample_rate/2]");
  if (cutoff_hz == nyquist) return audio;
  const auto h = low_pass_kernel(cutoff_hz, audio.sample_rate);
  return AudioBuffer{fir_same(audio.samples, h), audio.sample_rate};
}

AudioBuffer high_pass(const AudioBuffer& audio, double cutoff_hz) {
  const auto low = low_pass(audio, cutoff_hz);
  AudioBuffer out = audio;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] -= low.samples[i];
  return out;
}

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

double measure_snr(const AudioBuffer& reference, const AudioBuffer& test) {
  if (reference.size() != test.size())
    throw ParameterError("measure_snr needs equal-length buffers");
  if (reference.sample_rate != test.sample_rate)
    throw ParameterError("measure_snr needs equal sample rates");
  double signal = 0.0;
  double residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double r = reference.samples[i];
    const double d = test.samples[i] - r;
    signal += r * r;
    residual += d * d;
  }
  if (residual == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / residual);
}

double DeterministicRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace hvc
