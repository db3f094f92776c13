#ifndef HRLME_ESTIMATOR_HPP
#define HRLME_ESTIMATOR_HPP

#include "hrlme/checkpoint.hpp"
#include "hrlme/corpus.hpp"
#include "hrlme/nnkit.hpp"

#include <cstdint>
#include <vector>

namespace hrlme {

/// Anything that can score P(r | x). Rewards only need this much.
class RelationLikelihood {
 public:
  virtual ~RelationLikelihood() = default;
  /// Floored at nn::kProbFloor. Throws std::out_of_range for a bad relation.
  virtual double prob_of(const Sentence& sentence, std::size_t relation) const = 0;
};

struct EstimatorConfig {
  std::size_t vocab_size = 2;
  std::size_t n_relations = 2;
  Eigen::Index word_dim = 50;
  Eigen::Index pos_dim = 5;
  Eigen::Index feature_maps = 230;
};

/// Word + position-embedding CNN relation classifier:
/// P(r|x) = softmax(W_r tanh(maxpool(conv3(x))) + b_r).
class CnnEstimator : public RelationLikelihood {
 public:
  struct Output {
    nn::Vector probs;
    nn::Vector pooled;
    /// tanh(pooled); the sentence representation handed to the selector.
    nn::Vector repr;
  };

  CnnEstimator(const EstimatorConfig& config, std::uint64_t seed);

  static CnnEstimator from_checkpoint(const Checkpoint& ckpt);
  void export_to(Checkpoint& ckpt) const;

  const EstimatorConfig& config() const { return config_; }
  Eigen::Index input_dim() const { return config_.word_dim + 2 * config_.pos_dim; }
  Eigen::Index word_dim() const { return config_.word_dim; }
  Eigen::Index feature_maps() const { return config_.feature_maps; }
  std::size_t num_relations() const { return config_.n_relations; }

  /// T x (d_w + 2 d_p): word embedding, head-offset embedding, tail-offset embedding.
  nn::Matrix encode(const Sentence& sentence) const;
  /// Inference-mode forward pass (no dropout).
  Output forward(const Sentence& sentence) const;
  double prob_of(const Sentence& sentence, std::size_t relation) const override;
  /// Word embedding row for a vocabulary id; UNK for out-of-table ids.
  nn::Vector word_embedding(int token_id) const;

  /// Cross-entropy loss of one sentence; adds scale * dLoss/dparam into the
  /// gradient buffers. Dropout is applied to repr when dropout_rng is given.
  double accumulate_gradient(const Sentence& sentence, std::size_t label, double scale,
                             nn::Rng* dropout_rng, double dropout_p);

  const nn::ParamSet& params() const { return params_; }
  /// Throws once the estimator is frozen.
  nn::ParamSet& mutable_params();

  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

 private:
  CnnEstimator(const EstimatorConfig& config, nn::ParamSet params);

  EstimatorConfig config_;
  nn::ParamSet params_;
  std::size_t word_emb_, pos_head_, pos_tail_, conv_w_, conv_b_, out_w_, out_b_;
  bool frozen_ = false;
};

struct EstimatorTrainOptions {
  double lr = 0.02;
  std::size_t batch = 160;
  std::size_t epochs = 25;
  double dropout = 0.5;
  std::uint64_t seed = 1;
  bool include_test = false;
};

struct EstimatorTrainLog {
  /// Mean pre-update batch loss per epoch.
  std::vector<double> epoch_loss;
};

/// Minimizes mean cross-entropy over every training sentence with its noisy
/// label, then freezes the estimator.
EstimatorTrainLog train_estimator(CnnEstimator& estimator, const Corpus& corpus,
                                  const EstimatorTrainOptions& options);

/// Mean cross-entropy of the sentences without touching gradients.
double mean_loss(const CnnEstimator& estimator, const std::vector<const Sentence*>& sentences);

std::vector<const Sentence*> sentences_of(const Corpus& corpus, bool include_test);

}  // namespace hrlme

#endif  // HRLME_ESTIMATOR_HPP
