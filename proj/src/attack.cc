#include "hvc/attack.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hvc/dsp.h"
#include "hvc/errors.h"
#include "hvc/vad.h"

namespace hvc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double min_window(const PerturbationParams& p) {
  return std::min(p.tdi_window_ms.value_or(kInf), p.rpg_window_ms.value_or(kInf));
}

double total_hfa(const PerturbationParams& p) {
  double sum = 0.0;
  for (const auto& c : p.hfa_components) sum += c.amplitude;
  return sum;
}

AttackCandidate make_candidate(const AudioBuffer& source, const PerturbationParams& params,
                               std::size_t rank) {
  auto out = perturb(source, params);
  AttackCandidate c;
  c.params = params;
  c.audio = std::move(out.audio);
  c.hfa_scale = out.hfa_scale;
  c.distortion_rank = rank;
  return c;
}

}  // namespace

TranscriberVerdict TranscriberBackend::transcribe(const AudioBuffer& audio) {
  std::lock_guard lock(mutex_);
  if (used_ >= budget_)
    throw BudgetExceededError("query budget of " + std::to_string(budget_) + " exhausted");
  Response r = query(audio);
  ++used_;
  return TranscriberVerdict{r.accepted, std::move(r.transcript), used_};
}

std::size_t TranscriberBackend::queries_used() const {
  std::lock_guard lock(mutex_);
  return used_;
}

std::size_t TranscriberBackend::remaining() const {
  std::lock_guard lock(mutex_);
  return budget_ - used_;
}

MockOracle::MockOracle(const AudioBuffer& reference, std::string transcript, double threshold,
                       std::size_t budget, FeatureConfig config)
    : TranscriberBackend(budget),
      config_(std::move(config)),
      reference_(extract_features(reference, config_)),
      transcript_(std::move(transcript)),
      threshold_(threshold) {
  if (!(threshold >= 0.0)) throw ParameterError("mock oracle threshold must be >= 0");
}

double MockOracle::distance(const AudioBuffer& audio) const {
  try {
    return feature_distance(extract_features(audio, config_), reference_);
  } catch (const EmptyInputError&) {
    return kInf;
  }
}

MockOracle::Response MockOracle::query(const AudioBuffer& audio) {
  if (std::isinf(threshold_)) return {true, transcript_};
  if (distance(audio) <= threshold_) return {true, transcript_};
  return {false, {}};
}

std::unique_ptr<MockOracle> mock_oracle(const AudioBuffer& reference,
                                        const std::string& reference_transcript,
                                        double threshold, std::size_t budget) {
  return std::make_unique<MockOracle>(reference, reference_transcript, threshold, budget);
}

ThresholdCalibration calibrate_threshold(const std::vector<AudioBuffer>& fixtures,
                                         std::uint64_t seed, const FeatureConfig& config) {
  if (fixtures.empty()) throw ParameterError("calibration needs at least one fixture");
  ThresholdCalibration cal;
  cal.min_noise_distance = kInf;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& x = fixtures[i];
    const auto ref = extract_features(x, config);
    const auto perturbed = rpg(x, config.frame_ms, seed + i);
    cal.max_perturbed_distance = std::max(
        cal.max_perturbed_distance, feature_distance(ref, extract_features(perturbed, config)));

    const double rms = std::sqrt(mean_power(x.samples));
    DeterministicRng rng(seed + 1000003 * (i + 1));
    AudioBuffer noise{std::vector<double>(x.size()), x.sample_rate};
    for (auto& v : noise.samples) v = rng.gaussian();
    const double noise_rms = std::sqrt(mean_power(noise.samples));
    for (auto& v : noise.samples) v *= rms / noise_rms;
    cal.min_noise_distance = std::min(cal.min_noise_distance,
                                      feature_distance(ref, extract_features(noise, config)));
  }
  cal.threshold = 0.5 * (cal.max_perturbed_distance + cal.min_noise_distance);
  return cal;
}

bool more_distorted(const PerturbationParams& a, const PerturbationParams& b) {
  const double wa = min_window(a), wb = min_window(b);
  if (wa != wb) return wa < wb;
  const double ta = a.ts_factor_percent.value_or(100.0);
  const double tb = b.ts_factor_percent.value_or(100.0);
  if (ta != tb) return ta > tb;
  return total_hfa(a) > total_hfa(b);
}

std::vector<AttackCandidate> rank_by_distortion(std::vector<AttackCandidate> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const AttackCandidate& a, const AttackCandidate& b) {
                     return more_distorted(a.params, b.params);
                   });
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].distortion_rank = i;
  return candidates;
}

std::vector<PerturbationParams> rank_params_by_distortion(std::vector<PerturbationParams> params) {
  std::stable_sort(params.begin(), params.end(), more_distorted);
  return params;
}

AttackOutcome generic_attack(const AudioBuffer& source, TranscriberBackend& backend,
                             const std::vector<PerturbationParams>& schedule) {
  if (schedule.empty()) throw ParameterError("attack schedule is empty");
  const auto ranked = rank_params_by_distortion(schedule);
  AttackOutcome outcome;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (backend.remaining() == 0) {
      outcome.budget_exhausted = true;
      return outcome;
    }
    AttackCandidate candidate = make_candidate(source, ranked[i], i);
    auto verdict = backend.transcribe(candidate.audio);
    outcome.verdicts.push_back(verdict);
    if (verdict.accepted) {
      candidate.verdict = std::move(verdict);
      outcome.accepted = std::move(candidate);
      return outcome;
    }
  }
  outcome.budget_exhausted = backend.remaining() == 0;
  return outcome;
}

std::vector<std::vector<std::size_t>> combination_order(const std::vector<std::size_t>& sizes) {
  std::vector<std::vector<std::size_t>> out;
  if (sizes.empty() ||
      std::any_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 0; }))
    return out;
  std::vector<std::size_t> idx(sizes.size(), 0);
  while (true) {
    out.push_back(idx);
    std::size_t pos = sizes.size();
    while (pos > 0) {
      --pos;
      if (++idx[pos] < sizes[pos]) break;
      idx[pos] = 0;
      if (pos == 0) return out;
    }
  }
}

std::vector<std::vector<PerturbationParams>> select_word_variants(
    const std::vector<AudioBuffer>& words, const std::vector<PerturbationParams>& schedule,
    const ImprovedAttackOptions& options) {
  const auto ranked = rank_params_by_distortion(schedule);
  std::vector<std::vector<PerturbationParams>> variants(words.size());
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::optional<FeatureMatrix> clean;
    if (options.word_feature_threshold) {
      try {
        clean = extract_features(words[w], options.features);
      } catch (const EmptyInputError&) {
        // Too short to analyse; every setting is admissible.
      }
    }
    for (const auto& params : ranked) {
      if (variants[w].size() >= options.variants_per_word) break;
      if (clean) {
        const auto perturbed = perturb(words[w], params).audio;
        double d = kInf;
        try {
          d = feature_distance(*clean, extract_features(perturbed, options.features));
        } catch (const EmptyInputError&) {
        }
        if (d > *options.word_feature_threshold) continue;
      }
      variants[w].push_back(params);
    }
  }
  return variants;
}

AudioBuffer concatenate(const std::vector<AudioBuffer>& parts) {
  AudioBuffer out;
  if (parts.empty()) return out;
  out.sample_rate = parts.front().sample_rate;
  for (const auto& p : parts) {
    if (p.sample_rate != out.sample_rate)
      throw ParameterError("cannot concatenate buffers with different sample rates");
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  }
  return out;
}

AttackOutcome improved_attack(const std::vector<AudioBuffer>& words, TranscriberBackend& backend,
                              const std::vector<PerturbationParams>& schedule,
                              const ImprovedAttackOptions& options) {
  if (words.empty()) throw ParameterError("improved attack needs at least one word");
  if (options.variants_per_word < 1) throw ParameterError("variants_per_word must be >= 1");
  if (schedule.empty()) throw ParameterError("attack schedule is empty");

  const auto variants = select_word_variants(words, schedule, options);
  std::vector<std::vector<AudioBuffer>> perturbed(words.size());
  std::vector<std::vector<double>> scales(words.size());
  std::vector<std::size_t> sizes;
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (const auto& params : variants[w]) {
      auto out = perturb(words[w], params);
      perturbed[w].push_back(std::move(out.audio));
      scales[w].push_back(out.hfa_scale);
    }
    sizes.push_back(variants[w].size());
  }

  AttackOutcome outcome;
  const auto order = combination_order(sizes);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (backend.remaining() == 0) {
      outcome.budget_exhausted = true;
      return outcome;
    }
    std::vector<AudioBuffer> parts;
    AttackCandidate candidate;
    candidate.distortion_rank = rank;
    for (std::size_t w = 0; w < words.size(); ++w) {
      const std::size_t choice = order[rank][w];
      parts.push_back(perturbed[w][choice]);
      candidate.word_params.push_back(variants[w][choice]);
      candidate.hfa_scale = std::min(candidate.hfa_scale, scales[w][choice]);
    }
    candidate.params = candidate.word_params.front();
    candidate.audio = concatenate(parts);
    auto verdict = backend.transcribe(candidate.audio);
    outcome.verdicts.push_back(verdict);
    if (verdict.accepted) {
      candidate.verdict = std::move(verdict);
      outcome.accepted = std::move(candidate);
      return outcome;
    }
  }
  outcome.budget_exhausted = backend.remaining() == 0;
  return outcome;
}

std::vector<AudioBuffer> split_words(const AudioBuffer& audio,
                                     const std::vector<std::size_t>& boundaries) {
  std::vector<AudioBuffer> out;
  std::size_t prev = 0;
  for (std::size_t b : boundaries) {
    if (b <= prev || b >= audio.size())
      throw ParameterError("word boundaries must be strictly increasing and inside the audio");
    out.push_back(AudioBuffer{
        std::vector<double>(audio.samples.begin() + static_cast<std::ptrdiff_t>(prev),
                            audio.samples.begin() + static_cast<std::ptrdiff_t>(b)),
        audio.sample_rate});
    prev = b;
  }
  out.push_back(AudioBuffer{
      std::vector<double>(audio.samples.begin() + static_cast<std::ptrdiff_t>(prev),
                          audio.samples.end()),
      audio.sample_rate});
  return out;
}

std::vector<AudioBuffer> split_words_by_vad(const AudioBuffer& audio) {
  const auto regions = detect_speech(audio);
  std::vector<std::size_t> boundaries;
  for (std::size_t i = 0; i + 1 < regions.size(); ++i) {
    const double mid = 0.5 * (regions[i].end + regions[i + 1].start);
    const auto b = static_cast<std::size_t>(std::llround(mid * audio.sample_rate));
    if (b > (boundaries.empty() ? 0 : boundaries.back()) && b < audio.size())
      boundaries.push_back(b);
  }
  return split_words(audio, boundaries);
}

}  // namespace hvc
