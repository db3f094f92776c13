#ifndef HRLME_TRAINER_HPP
#define HRLME_TRAINER_HPP

#include "hrlme/corpus.hpp"
#include "hrlme/estimator.hpp"
#include "hrlme/extractor.hpp"
#include "hrlme/selector.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hrlme {

/// kHrl trains selector and extractor jointly; kSingle forces every option to
/// "select" and never touches the selector.
enum class TrainMode { kHrl, kSingle };

const char* mode_name(TrainMode mode);
TrainMode parse_mode(const std::string& name);

struct TrainConfig {
  RewardWeights weights;
  double gamma = 0.999;
  double lr_hrl = 0.001;
  double lr_pretrain = 0.01;
  std::size_t episodes = 50;
  std::size_t trajectories_per_bag = 5;
  TrainMode mode = TrainMode::kHrl;
  std::uint64_t seed = 1;
  /// Subtract a moving average of returns; off by default.
  bool use_baseline = false;
  double baseline_decay = 0.9;
  /// Final selector reward when nothing is selected; log(1/n_r) when unset.
  std::optional<double> empty_selection_value;
};

/// Caches the frozen estimator's per-sentence encodings and representations.
class FeatureBank {
 public:
  explicit FeatureBank(const CnnEstimator& estimator) : estimator_(estimator) {}

  const nn::Matrix& encoded(const Sentence& sentence) const { return lookup(sentence).encoded; }
  const nn::Vector& repr(const Sentence& sentence) const { return lookup(sentence).repr; }
  const CnnEstimator& estimator() const { return estimator_; }

 private:
  struct Entry {
    nn::Matrix encoded;
    nn::Vector repr;
  };
  const Entry& lookup(const Sentence& sentence) const;

  const CnnEstimator& estimator_;
  mutable std::unordered_map<const Sentence*, Entry> cache_;
};

struct SentenceStep {
  nn::Vector selector_state;
  bool option = false;
  /// mu(g=1|state); 1 in single mode.
  double option_prob = 1.0;
  double option_log_prob = 0.0;
  /// Extractor reward when selected, 0 otherwise.
  double intermediate_reward = 0.0;
  std::optional<ExtractorRollout> extraction;
};

struct Trajectory {
  std::vector<SentenceStep> steps;
  double final_reward = 0.0;
};

struct EpisodeContext {
  const FeatureBank& features;
  const MentionScorer& scorer;
  const TrainConfig& config;

  std::size_t num_relations() const { return features.estimator().num_relations(); }
  double empty_selection_value() const;
};

/// One pass over the bag: an option per sentence, and a mention for every
/// selected sentence. rng may be null in greedy mode.
Trajectory run_bag_episode(const Bag& bag, const SelectorPolicy& selector, const ExtractorPolicy& extractor,
                           const EpisodeContext& ctx, nn::Rng* rng, ActionMode mode = ActionMode::kSample);

/// Training rollout: as run_bag_episode in sample mode, but the extractor is
/// updated from each selected sentence's rollout as soon as its reward is known.
/// extractor_baseline is read before each update and then refreshed as a
/// moving average when config.use_baseline is set.
Trajectory run_bag_episode_training(const Bag& bag, const SelectorPolicy& selector, ExtractorPolicy& extractor,
                                    const EpisodeContext& ctx, nn::Rng& rng, double& extractor_baseline);

/// R(g_t) = r_final^h + sum_{k>=t} gamma^(k-t) r^l(x_k), t zero-based.
double selector_return(const Trajectory& trajectory, std::size_t t, double gamma);

/// Ascent direction sum_t (R(g_t) - baseline) grad log mu(g_t|s_t) for one trajectory.
nn::Vector selector_gradient(const Trajectory& trajectory, double gamma, Eigen::Index state_dim, double baseline = 0.0);
/// Extractor ascent direction summed over the trajectory's selected sentences.
nn::Vector trajectory_extractor_gradient(const Trajectory& trajectory, Eigen::Index state_dim);

void reinforce_update_selector(std::span<const Trajectory> trajectories, SelectorPolicy& policy, double gamma,
                               double lr, double baseline = 0.0);

struct ExactGradient {
  nn::Vector selector;
  nn::Vector extractor;
  double total_probability = 0.0;
  std::size_t assignments = 0;
};

inline constexpr std::size_t kMaxExhaustiveDecisions = 16;

/// Expected REINFORCE directions for both policies by enumerating every
/// option/action assignment of the bag (policies held fixed).
ExactGradient exhaustive_policy_gradient(const Bag& bag, const SelectorPolicy& selector,
                                         const ExtractorPolicy& extractor, const EpisodeContext& ctx);

struct EpisodeMetrics {
  std::size_t episode = 0;
  double mean_final_reward_h = 0.0;
  double mean_reward_l = 0.0;
  double selection_rate_positive = 0.0;
  double selection_rate_noise = 0.0;
};

struct TrainLog {
  std::vector<EpisodeMetrics> episodes;
};

TrainLog train_hrl(const Corpus& corpus, SelectorPolicy& selector, ExtractorPolicy& extractor,
                   const FeatureBank& features, const MentionScorer& scorer, const TrainConfig& config);

struct SelectionTrace {
  std::size_t bag = 0;
  std::vector<bool> options;
  double final_reward = 0.0;
};

struct Inference {
  /// One entry per selected sentence; empty mentions included.
  std::vector<MentionResult> extractions;
  std::vector<SelectionTrace> traces;
};

/// Greedy selection (mu > 0.5, or all in single mode) and greedy extraction
/// over the bags of the requested split (all bags when unset).
Inference extract_greedy(const Corpus& corpus, const SelectorPolicy& selector, const ExtractorPolicy& extractor,
                         const FeatureBank& features, const MentionScorer& scorer, TrainMode mode,
                         std::optional<Split> split);

}  // namespace hrlme

#endif  // HRLME_TRAINER_HPP
