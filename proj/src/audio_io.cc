#include "hvc/audio_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string_view>

#include "hvc/errors.h"

namespace hvc {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at,
            std::string_view tag) {
  return std::memcmp(b.data() + at, tag.data(), 4) == 0;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) {
  out.insert(out.end(), tag.begin(), tag.end());
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

std::vector<std::uint8_t> header_for(std::uint16_t format, std::uint16_t bits,
                                     int sample_rate, std::size_t n_samples) {
  const std::uint32_t bytes_per_sample = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(n_samples * bytes_per_sample);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * bytes_per_sample);
  put_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  return out;
}

}  // namespace

AudioBuffer read_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE"))
    throw FormatError("not a RIFF/WAVE container");

  std::optional<FmtChunk> fmt;
  std::optional<std::span<const std::uint8_t>> data;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (chunk_size > bytes.size() - body) {
      // Some writers leave a bogus size on a trailing data chunk; clamp it.
      if (!tag_is(bytes, pos, "data")) throw FormatError("truncated chunk");
    }
    const std::size_t avail = std::min<std::size_t>(chunk_size, bytes.size() - body);
    if (tag_is(bytes, pos, "fmt ")) {
      if (avail < 16) throw FormatError("fmt chunk too short");
      FmtChunk f;
      f.format = read_u16(bytes, body);
      f.channels = read_u16(bytes, body + 2);
      f.sample_rate = read_u32(bytes, body + 4);
      f.block_align = read_u16(bytes, body + 12);
      f.bits = read_u16(bytes, body + 14);
      if (f.format == kFormatExtensible) {
        if (avail < 26) throw FormatError("extensible fmt chunk too short");
        f.format = read_u16(bytes, body + 24);
      }
      fmt = f;
    } else if (tag_is(bytes, pos, "data")) {
      data = bytes.subspan(body, avail);
    }
    pos = body + avail + (avail & 1);
  }
  if (!fmt) throw FormatError("missing fmt chunk");
  if (!data) throw FormatError("missing data chunk");
  if (fmt->sample_rate == 0) throw FormatError("zero sample rate");
  if (fmt->channels == 0) throw FormatError("zero channels");

  const bool pcm16 = fmt->format == kFormatPcm && fmt->bits == 16;
  const bool f32 = fmt->format == kFormatFloat && fmt->bits == 32;
  if (!pcm16 && !f32)
    throw UnsupportedCodecError("unsupported WAV encoding: format " +
                                std::to_string(fmt->format) + ", " +
                                std::to_string(fmt->bits) + " bits");
  if (fmt->channels > 2)
    throw UnsupportedCodecError("only mono and stereo input is supported");

  const std::size_t width = fmt->bits / 8;
  const std::size_t frame_bytes = width * fmt->channels;
  const std::size_t n_frames = data->size() / frame_bytes;

  AudioBuffer out;
  out.sample_rate = static_cast<int>(fmt->sample_rate);
  out.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt->channels; ++c) {
      const std::size_t at = i * frame_bytes + c * width;
      if (pcm16) {
        acc += static_cast<std::int16_t>(read_u16(*data, at)) / 32768.0;
      } else {
        const float v = std::bit_cast<float>(read_u32(*data, at));
        if (!std::isfinite(v)) throw FormatError("non-finite float sample");
        acc += v;
      }
    }
    out.samples[i] = acc / fmt->channels;
  }
  return out;
}

std::vector<std::uint8_t> write_wav(const AudioBuffer& audio) {
  auto out = header_for(kFormatPcm, 16, audio.sample_rate, audio.size());
  for (double s : audio.samples) {
    const double q = std::clamp(std::round(s * 32768.0), -32767.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

std::vector<std::uint8_t> write_wav_float32(const AudioBuffer& audio) {
  auto out = header_for(kFormatFloat, 32, audio.sample_rate, audio.size());
  for (double s : audio.samples)
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
  return out;
}

AudioBuffer load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_wav(bytes);
}

void save_wav(const std::string& path, const AudioBuffer& audio, bool float32) {
  const auto bytes = float32 ? write_wav_float32(audio) : write_wav(audio);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

AudioBuffer resample(const AudioBuffer& audio, int target_rate) {
  if (target_rate <= 0) throw ParameterError("target rate must be positive");
  if (target_rate == audio.sample_rate) return audio;

  const double ratio = static_cast<double>(target_rate) / audio.sample_rate;
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(audio.size()) * ratio));
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  if (audio.empty()) return out;
  const std::size_t last = audio.size() - 1;
  for (std::size_t k = 0; k < n_out; ++k) {
    const double t = static_cast<double>(k) / ratio;
    const auto i = static_cast<std::size_t>(t);
    if (i >= last) {
      out.samples[k] = audio.samples[last];
      continue;
    }
    const double frac = t - static_cast<double>(i);
    out.samples[k] = audio.samples[i] * (1.0 - frac) + audio.samples[i + 1] * frac;
  }
  return out;
}

void require_canonical_rate(const AudioBuffer& audio, const char* what) {
  if (audio.sample_rate != kCanonicalRate)
    throw ParameterError(std::string(what) + " requires " +
                         std::to_string(kCanonicalRate) + " Hz audio, got " +
                         std::to_string(audio.sample_rate) +
                         " Hz (resample explicitly first)");
}

}  // namespace hvc
