#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hvc/audio_io.h"
#include "hvc/features.h"
#include "hvc/perturbation.h"

namespace hvc {

inline constexpr std::size_t kDefaultQueryBudget = 10;

struct TranscriberVerdict {
  bool accepted = false;
  std::string transcript;
  std::size_t query_index = 0;  // 1-based, strictly increasing per backend
};

// A transcription service with a hard query budget. transcribe() throws
// BudgetExceededError once the budget is spent; a BackendError from the
// concrete query leaves the budget untouched.
class TranscriberBackend {
 public:
  explicit TranscriberBackend(std::size_t budget = kDefaultQueryBudget) : budget_(budget) {}
  virtual ~TranscriberBackend() = default;
  TranscriberBackend(const TranscriberBackend&) = delete;
  TranscriberBackend& operator=(const TranscriberBackend&) = delete;

  TranscriberVerdict transcribe(const AudioBuffer& audio);

  std::size_t budget() const { return budget_; }
  std::size_t queries_used() const;
  std::size_t remaining() const;

 protected:
  struct Response {
    bool accepted = false;
    std::string transcript;
  };
  virtual Response query(const AudioBuffer& audio) = 0;

 private:
  std::size_t budget_;
  std::size_t used_ = 0;
  mutable std::mutex mutex_;
};

// Offline stand-in for a VPS: accepts audio whose features lie within
// `threshold` of the reference's.
class MockOracle : public TranscriberBackend {
 public:
  MockOracle(const AudioBuffer& reference, std::string transcript, double threshold,
             std::size_t budget = kDefaultQueryBudget, FeatureConfig config = {});

  // Feature distance to the reference; infinity when the audio is too short
  // to yield a frame. Does not consume budget.
  double distance(const AudioBuffer& audio) const;
  double threshold() const { return threshold_; }

 protected:
  Response query(const AudioBuffer& audio) override;

 private:
  FeatureConfig config_;
  FeatureMatrix reference_;
  std::string transcript_;
  double threshold_;
};

std::unique_ptr<MockOracle> mock_oracle(const AudioBuffer& reference,
                                        const std::string& reference_transcript,
                                        double threshold,
                                        std::size_t budget = kDefaultQueryBudget);

struct ThresholdCalibration {
  double max_perturbed_distance = 0.0;  // over aligned-RPG versions of the fixtures
  double min_noise_distance = 0.0;      // over equal-length, equal-RMS white noise
  double threshold = 0.0;               // midpoint of the two
};

// RPG windows match the feature frame so perturbation and analysis align.
ThresholdCalibration calibrate_threshold(const std::vector<AudioBuffer>& fixtures,
                                         std::uint64_t seed = 42,
                                         const FeatureConfig& config = {});

struct AttackCandidate {
  PerturbationParams params;
  // Per-word settings of an improved-attack concatenation (empty otherwise).
  std::vector<PerturbationParams> word_params;
  AudioBuffer audio;
  std::size_t distortion_rank = 0;
  std::optional<TranscriberVerdict> verdict;
  double hfa_scale = 1.0;
};

struct AttackOutcome {
  std::optional<AttackCandidate> accepted;
  // Every verdict issued during the run, in query order.
  std::vector<TranscriberVerdict> verdicts;
  bool budget_exhausted = false;

  std::size_t queries() const { return verdicts.size(); }
};

// True when `a` sounds strictly worse than `b`: smaller TDI/RPG window first,
// then larger TS factor, then larger total HFA amplitude.
bool more_distorted(const PerturbationParams& a, const PerturbationParams& b);

// Stable, worst-sounding first. Assigns distortion_rank by position.
std::vector<AttackCandidate> rank_by_distortion(std::vector<AttackCandidate> candidates);
std::vector<PerturbationParams> rank_params_by_distortion(std::vector<PerturbationParams> params);

// Queries the schedule worst-sounding first and stops at the first accepted
// candidate or when the budget runs out.
AttackOutcome generic_attack(const AudioBuffer& source, TranscriberBackend& backend,
                             const std::vector<PerturbationParams>& schedule);

struct ImprovedAttackOptions {
  std::size_t variants_per_word = 1;
  // When set, a per-word setting is admissible only if the perturbed word
  // stays within this feature distance of the clean word.
  std::optional<double> word_feature_threshold;
  FeatureConfig features;
};

// Odometer order over per-position choice counts, last position fastest.
std::vector<std::vector<std::size_t>> combination_order(const std::vector<std::size_t>& sizes);

// Per word: the `variants_per_word` most distorted admissible settings.
std::vector<std::vector<PerturbationParams>> select_word_variants(
    const std::vector<AudioBuffer>& words, const std::vector<PerturbationParams>& schedule,
    const ImprovedAttackOptions& options);

AudioBuffer concatenate(const std::vector<AudioBuffer>& parts);

// Perturbs each word independently and queries the concatenations of every
// combination in lexicographic distortion order.
AttackOutcome improved_attack(const std::vector<AudioBuffer>& words, TranscriberBackend& backend,
                              const std::vector<PerturbationParams>& schedule,
                              const ImprovedAttackOptions& options);

// Splits at explicit sample indices (strictly increasing, inside the buffer).
std::vector<AudioBuffer> split_words(const AudioBuffer& audio,
                                     const std::vector<std::size_t>& boundaries);

// One word per detected speech region; the gaps between regions are split at
// their midpoints so no samples are dropped.
std::vector<AudioBuffer> split_words_by_vad(const AudioBuffer& audio);

}  // namespace hvc
