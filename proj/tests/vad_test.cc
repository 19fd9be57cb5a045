#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.h"
#include "hvc/errors.h"
#include "hvc/perturbation.h"
#include "hvc/vad.h"

namespace hvc {
namespace {

AudioBuffer burst_file(std::uint64_t seed, double total_s, double start, double end) {
  AudioBuffer a{std::vector<double>(static_cast<std::size_t>(total_s * 16000), 0.0), 16000};
  const auto s0 = static_cast<std::size_t>(start * 16000);
  const auto burst = testing::band_noise(seed, static_cast<std::size_t>((end - start) * 16000),
                                         300.0, 3400.0, 0.5);
  std::copy(burst.begin(), burst.end(), a.samples.begin() + static_cast<std::ptrdiff_t>(s0));
  return a;
}

double total(const std::vector<SpeechRegion>& r) {
  double t = 0;
  for (const auto& x : r) t += x.end - x.start;
  return t;
}

void expect_well_formed(const std::vector<SpeechRegion>& regions, double duration) {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    EXPECT_GE(regions[i].start, 0.0);
    EXPECT_LT(regions[i].start, regions[i].end);
    EXPECT_LE(regions[i].end, duration + 1e-9);
    if (i > 0) {
      EXPECT_GT(regions[i].start, regions[i - 1].end);
    }
  }
}

TEST(Vad, DigitalSilence) {
  EXPECT_TRUE(detect_speech(AudioBuffer{std::vector<double>(16000, 0.0), 16000}).empty());
  EXPECT_TRUE(detect_speech(AudioBuffer{{}, 16000}).empty());
}

TEST(Vad, FullScaleNoiseIsOneRegion) {
  AudioBuffer a{testing::band_noise(3, 32000, 200.0, 3800.0, 1.0), 16000};
  const auto r = detect_speech(a);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0].start, 0.0, 0.011);
  EXPECT_NEAR(r[0].end, 2.0, 0.011);
}

TEST(Vad, SingleBurstEndpoints) {
  const auto a = burst_file(5, 1.5, 0.5, 1.0);
  const auto r = detect_speech(a);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0].start, 0.5, 0.05 + 1e-9);
  EXPECT_NEAR(r[0].end, 1.0, 0.05 + 1e-9);
  EXPECT_EQ(format_regions(r).find('\t'), 5u);
}

TEST(Vad, RegionsWellFormedOnUtterances) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto u = testing::synth_utterance(seed, 2.0);
    const auto r = detect_speech(u.audio);
    expect_well_formed(r, u.audio.duration_seconds());
    EXPECT_GE(overlap_seconds(u.syllables, r), 0.9 * total(u.syllables)) << seed;
  }
}

TEST(Vad, ScaleCovariance) {
  const auto u = testing::synth_utterance(9, 2.0);
  const auto base = detect_speech(u.audio);
  for (double g : {0.05, 0.3, 1.8}) {
    AudioBuffer b = u.audio;
    for (auto& v : b.samples) v *= g;
    EXPECT_EQ(detect_speech(b), base) << g;
  }
}

TEST(Vad, PerturbedSpeechStillLocated) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto u = testing::synth_utterance(seed, 2.0);
    const auto clean = detect_speech(u.audio);
    for (const auto& p : {tdi(u.audio, 1.0), tdi(u.audio, 4.0), rpg(u.audio, 2.0, seed),
                          rpg(u.audio, 20.0, seed)})
      EXPECT_GE(overlap_seconds(clean, detect_speech(p)), 0.9 * total(clean)) << seed;
  }
}

TEST(Vad, HfaToneAboveSpeechBandIgnored) {
  const auto a = burst_file(6, 1.5, 0.5, 1.0);
  const auto with_tone = hfa(a, {{7500.0, 0.25}}).audio;
  const auto r = detect_speech(with_tone);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0].start, 0.5, 0.05 + 1e-9);
  EXPECT_NEAR(r[0].end, 1.0, 0.05 + 1e-9);
  VadConfig full_band;
  full_band.band_high_hz = 0.0;
  const auto fb = detect_speech(with_tone, full_band);
  ASSERT_EQ(fb.size(), 1u);
  EXPECT_NEAR(fb[0].start, 0.0, 1e-9);
}

TEST(Vad, HangoverBridgesShortGaps) {
  AudioBuffer a = burst_file(2, 1.0, 0.2, 0.4);
  const auto second = testing::band_noise(3, 3200, 300.0, 3400.0, 0.5);
  std::copy(second.begin(), second.end(), a.samples.begin() + 6880);  // gap of 30 ms
  EXPECT_EQ(detect_speech(a).size(), 1u);
  VadConfig no_hang;
  no_hang.hangover_frames = 0;
  EXPECT_EQ(detect_speech(a, no_hang).size(), 2u);
}

TEST(Vad, DropsTooShortRegions) {
  const auto a = burst_file(4, 1.0, 0.5, 0.505);
  VadConfig cfg;
  cfg.hangover_frames = 0;
  EXPECT_TRUE(detect_speech(a, cfg).empty());
}

TEST(Vad, RequiresCanonicalRate) {
  EXPECT_THROW(detect_speech(AudioBuffer{std::vector<double>(100), 8000}), ParameterError);
}

TEST(Vad, OverlapSeconds) {
  std::vector<SpeechRegion> truth{{0.0, 1.0}, {2.0, 3.0}};
  EXPECT_DOUBLE_EQ(overlap_seconds(truth, {{0.5, 2.5}}), 1.0);
  EXPECT_DOUBLE_EQ(overlap_seconds(truth, {}), 0.0);
  EXPECT_DOUBLE_EQ(overlap_seconds(truth, truth), 2.0);
}

}  // namespace
}  // namespace hvc
