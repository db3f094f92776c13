#ifndef HRLME_EXTRACTOR_HPP
#define HRLME_EXTRACTOR_HPP

#include "hrlme/corpus.hpp"
#include "hrlme/estimator.hpp"
#include "hrlme/policy.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hrlme {

struct RewardWeights {
  double lambda1 = 0.4;
  double lambda2 = 0.02;
  /// Returned for an empty mention, where the three-term reward is undefined.
  double empty_penalty = -1.0;
};

/// Reward weights for the "noisy" (default) or "clean" hyperparameter set.
RewardWeights preset_weights(const std::string& preset);

/// Low-level policy over [token encoding; mean chosen word embedding; relation one-hot].
class ExtractorPolicy : public LinearSigmoidPolicy {
 public:
  ExtractorPolicy(Eigen::Index input_dim, Eigen::Index word_dim, std::size_t n_relations)
      : LinearSigmoidPolicy("extractor", input_dim + word_dim + static_cast<Eigen::Index>(n_relations)),
        input_dim_(input_dim),
        word_dim_(word_dim) {}

  static ExtractorPolicy for_estimator(const CnnEstimator& est) {
    return ExtractorPolicy(est.input_dim(), est.word_dim(), est.num_relations());
  }

  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index word_dim() const { return word_dim_; }

 private:
  Eigen::Index input_dim_;
  Eigen::Index word_dim_;
};

/// Builds s_j = [encoded row j; chosen_avg; one-hot(relation)].
nn::Vector extractor_state(const nn::Matrix& encoded, Eigen::Index j, const nn::Vector& chosen_avg,
                           std::size_t relation, std::size_t n_relations);

double act_prob(const nn::Vector& state, const ExtractorPolicy& policy);

struct MentionResult {
  SentenceRef ref;
  /// Strictly increasing; never contains an entity index.
  IndexSet indices;
  std::string surface;
  double reward = 0.0;
};

struct ExtractorStep {
  Eigen::Index position = 0;
  nn::Vector state;
  bool action = false;
  /// pi(a=1|state) under the policy that produced the step.
  double prob_one = 0.5;
  double log_prob = 0.0;
};

struct ExtractorRollout {
  MentionResult mention;
  /// Non-forced decisions only.
  std::vector<ExtractorStep> steps;

  double log_prob() const;
};

enum class ActionMode { kSample, kGreedy };

/// Left-to-right keep/skip scan. Entity and PAD positions are forced to skip
/// and produce no step. rng is required in sample mode.
ExtractorRollout sample_mention(const Sentence& sentence, const nn::Matrix& encoded, const ExtractorPolicy& policy,
                                std::size_t n_relations, nn::Rng* rng, ActionMode mode);
ExtractorRollout sample_mention(const Sentence& sentence, const ExtractorPolicy& policy,
                                const CnnEstimator& estimator, nn::Rng* rng, ActionMode mode);

/// x' for the discriminability term: the indexed tokens deleted, entity
/// indices shifted, padded back to the minimum length.
Sentence remove_tokens(const Sentence& sentence, std::span<const int> indices);

/// Delayed extractor reward:
///   (P(r|x) - P(r|x')) / P(r|x) - l1 (k_L - k_1) / L - l2 sum_q (|k_q - e1| + |k_q - e2|) / L
double mention_reward(const Sentence& sentence, std::span<const int> indices, const RelationLikelihood& model,
                      const RewardWeights& weights);

/// Memoizes P(r|x) by sentence content. Not thread-safe.
class CachedLikelihood : public RelationLikelihood {
 public:
  explicit CachedLikelihood(const RelationLikelihood& model) : model_(model) {}
  double prob_of(const Sentence& sentence, std::size_t relation) const override;
  std::size_t cache_size() const { return cache_.size(); }

 private:
  const RelationLikelihood& model_;
  mutable std::unordered_map<std::string, double> cache_;
};

/// mention_reward bound to a model and weights, with caching.
class MentionScorer {
 public:
  MentionScorer(const RelationLikelihood& model, const RewardWeights& weights) : cached_(model), weights_(weights) {}

  double reward(const Sentence& sentence, std::span<const int> indices) const {
    return mention_reward(sentence, indices, cached_, weights_);
  }
  double prob_of(const Sentence& sentence, std::size_t relation) const { return cached_.prob_of(sentence, relation); }
  const RelationLikelihood& likelihood() const { return cached_; }
  const RewardWeights& weights() const { return weights_; }

 private:
  CachedLikelihood cached_;
  RewardWeights weights_;
};

/// Fills surface and reward for indices on sentence.
MentionResult make_mention(const Sentence& sentence, IndexSet indices, const MentionScorer& scorer,
                           SentenceRef ref = {});

/// Exhaustive search over candidate subsets of size 1..max_len (the empty
/// mention competes at the penalty). Ties: fewer words, then leftmost first
/// index, then lexicographic indices.
MentionResult brute_force_best(const Sentence& sentence, const MentionScorer& scorer, std::size_t max_len,
                               bool contiguous_only = false);

inline constexpr std::size_t kMaxBruteForceCandidates = 16;

/// REINFORCE ascent direction for one rollout: reward * sum_j grad log pi(a_j|s_j).
nn::Vector extractor_gradient(const ExtractorRollout& rollout, double reward, Eigen::Index state_dim);

/// Averages the rollouts' gradients (each with its own mention reward minus
/// baseline) and ascends.
void reinforce_update_extractor(std::span<const ExtractorRollout> rollouts, ExtractorPolicy& policy, double lr,
                                double baseline = 0.0);

struct PretrainOptions {
  RewardWeights weights;
  double lr = 0.01;
  std::size_t epochs = 5;
  std::size_t samples_per_sentence = 5;
  std::uint64_t seed = 1;
  /// Subtract the mean reward of the sentence's own samples; off by default.
  bool sample_mean_baseline = false;
};

struct PretrainLog {
  /// Mean sampled reward per epoch.
  std::vector<double> epoch_reward;
};

/// Trains the extractor alone on every training sentence (no selector).
PretrainLog pretrain_extractor(const Corpus& corpus, ExtractorPolicy& policy, const CnnEstimator& estimator,
                               const MentionScorer& scorer, const PretrainOptions& options);

}  // namespace hrlme

#endif  // HRLME_EXTRACTOR_HPP
