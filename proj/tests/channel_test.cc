#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.h"
#include "hvc/channel.h"
#include "hvc/dsp.h"
#include "hvc/errors.h"

namespace hvc {
namespace {

TEST(Channel, TransparentIsExactNoOp) {
  const auto a = testing::synth_utterance(1, 1.0).audio;
  const auto out = simulate(a, channel_preset("transparent"));
  EXPECT_EQ(out.audio, a);
  EXPECT_EQ(out.scale, 1.0);
  ChannelConfig flat;
  EXPECT_EQ(simulate(a, flat).audio, a);
}

TEST(Channel, SnrTargetsHitExactly) {
  const auto a = testing::synth_utterance(2, 1.0).audio;
  for (double snr : {0.0, 10.0, 20.0, 30.0, 45.0}) {
    ChannelConfig c;
    c.snr_db = snr;
    const auto out = simulate(a, c);
    ASSERT_EQ(out.scale, 1.0);
    EXPECT_NEAR(measure_snr(a, out.audio), snr, 1e-6) << snr;
  }
}

TEST(Channel, LowerSnrStrictlyNoisier) {
  const auto a = testing::synth_utterance(3, 1.0).audio;
  double prev = std::numeric_limits<double>::infinity();
  for (double snr : {40.0, 30.0, 20.0, 10.0, 5.0}) {
    ChannelConfig c;
    c.snr_db = snr;
    const double got = measure_snr(a, simulate(a, c).audio);
    EXPECT_LT(got, prev);
    prev = got;
  }
}

TEST(Channel, DeterministicPerSeed) {
  const auto a = testing::synth_utterance(4, 0.5).audio;
  auto c = channel_preset("harsh");
  EXPECT_EQ(simulate(a, c).audio, simulate(a, c).audio);
  auto d = c;
  d.noise_seed = 7;
  EXPECT_NE(simulate(a, c).audio, simulate(a, d).audio);
}

TEST(Channel, HarshPresetValues) {
  const auto c = channel_preset("harsh");
  EXPECT_EQ(c.band_low_hz, 100.0);
  EXPECT_EQ(c.band_high_hz, 7000.0);
  EXPECT_EQ(c.snr_db, 20.0);
  ASSERT_TRUE(c.reverb.has_value());
  EXPECT_THROW(channel_preset("studio"), ParameterError);
}

TEST(Channel, ReverbTapTrain) {
  AudioBuffer impulse{std::vector<double>(2000, 0.0), 16000};
  impulse.samples[0] = 0.5;
  ChannelConfig c;
  c.reverb = ReverbConfig{10.0, 0.5, 3};
  const auto out = simulate(impulse, c).audio;
  EXPECT_DOUBLE_EQ(out.samples[0], 0.5);
  EXPECT_DOUBLE_EQ(out.samples[160], 0.25);
  EXPECT_DOUBLE_EQ(out.samples[320], 0.125);
  EXPECT_DOUBLE_EQ(out.samples[480], 0.0625);
  EXPECT_EQ(out.samples[640], 0.0);
}

TEST(Channel, BandLimitRemovesOutOfBandTone) {
  const auto a = testing::sine(7800.0, 0.5, 8000);
  ChannelConfig c;
  c.band_high_hz = 6000.0;
  const auto out = simulate(a, c).audio;
  EXPECT_LT(mean_power({out.samples.data() + 1000, 6000}), 1e-4 * mean_power(a.samples));
  const auto low = testing::sine(30.0, 0.5, 16000);
  ChannelConfig hp;
  hp.band_low_hz = 300.0;
  const auto hout = simulate(low, hp).audio;
  EXPECT_LT(mean_power({hout.samples.data() + 2000, 12000}), 1e-2 * mean_power(low.samples));
}

TEST(Channel, RenormalizesOnClip) {
  AudioBuffer loud{std::vector<double>(1600, 0.9), 16000};
  ChannelConfig c;
  c.reverb = ReverbConfig{};
  const auto out = simulate(loud, c);
  EXPECT_LT(out.scale, 1.0);
  double peak = 0;
  for (double v : out.audio.samples) peak = std::max(peak, std::abs(v));
  EXPECT_NEAR(peak, 1.0, 1e-12);
}

TEST(Channel, UserNoiseIsTiled) {
  const auto a = testing::synth_utterance(5, 0.5).audio;
  ChannelConfig c;
  c.snr_db = 10.0;
  c.noise = AudioBuffer{testing::band_noise(1, 500, 100, 4000, 0.3), 16000};
  EXPECT_NEAR(measure_snr(a, simulate(a, c).audio), 10.0, 1e-6);
}

TEST(Channel, InvalidConfigs) {
  const AudioBuffer a{std::vector<double>(100, 0.1), 16000};
  ChannelConfig c;
  c.band_low_hz = 5000;
  c.band_high_hz = 4000;
  EXPECT_THROW(simulate(a, c), ParameterError);
  c = {};
  c.band_high_hz = 9000;
  EXPECT_THROW(simulate(a, c), ParameterError);
  c = {};
  c.reverb = ReverbConfig{10.0, 1.5, 2};
  EXPECT_THROW(simulate(a, c), ParameterError);
}

TEST(ChannelConfigText, Parses) {
  const auto c = parse_channel_config(
      "# office\nband_low = 200\nband_high=6000\nsnr_db = 15\nseed = 9\nreverb_taps = 2\n");
  EXPECT_EQ(c.band_low_hz, 200.0);
  EXPECT_EQ(c.band_high_hz, 6000.0);
  EXPECT_EQ(c.snr_db, 15.0);
  EXPECT_EQ(c.noise_seed, 9u);
  ASSERT_TRUE(c.reverb.has_value());
  EXPECT_EQ(c.reverb->taps, 2);
  EXPECT_TRUE(std::isinf(parse_channel_config("snr_db = inf\n").snr_db));
  EXPECT_FALSE(parse_channel_config("").reverb.has_value());
  EXPECT_THROW(parse_channel_config("volume = 3\n"), ParameterError);
  EXPECT_THROW(parse_channel_config("snr_db = loud\n"), ParameterError);
  EXPECT_THROW(parse_channel_config("band_low\n"), ParameterError);
}

}  // namespace
}  // namespace hvc
