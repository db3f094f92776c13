#ifndef HRLME_SELECTOR_HPP
#define HRLME_SELECTOR_HPP

#include "hrlme/corpus.hpp"
#include "hrlme/estimator.hpp"
#include "hrlme/policy.hpp"

#include <optional>
#include <span>

namespace hrlme {

/// Top-level policy over [current repr; mean selected repr; relation one-hot; mean mention word embedding].
class SelectorPolicy : public LinearSigmoidPolicy {
 public:
  SelectorPolicy(Eigen::Index repr_dim, Eigen::Index word_dim, std::size_t n_relations)
      : LinearSigmoidPolicy("selector", 2 * repr_dim + static_cast<Eigen::Index>(n_relations) + word_dim),
        repr_dim_(repr_dim),
        word_dim_(word_dim),
        n_relations_(n_relations) {}

  static SelectorPolicy for_estimator(const CnnEstimator& est) {
    return SelectorPolicy(est.feature_maps(), est.word_dim(), est.num_relations());
  }

  Eigen::Index repr_dim() const { return repr_dim_; }
  Eigen::Index word_dim() const { return word_dim_; }
  std::size_t num_relations() const { return n_relations_; }

 private:
  Eigen::Index repr_dim_;
  Eigen::Index word_dim_;
  std::size_t n_relations_;
};

/// Running aggregates that define the selector state within one bag.
class SelectorStateTracker {
 public:
  SelectorStateTracker(Eigen::Index repr_dim, Eigen::Index word_dim, std::size_t relation, std::size_t n_relations);

  nn::Vector state(const nn::Vector& current_repr) const;
  void add_selected(const nn::Vector& repr);
  void add_mention_word(const nn::Vector& word_embedding);

  nn::Vector chosen_avg_repr() const;
  nn::Vector mention_avg() const;
  std::size_t selected_count() const { return selected_; }

 private:
  std::size_t relation_;
  std::size_t n_relations_;
  nn::Vector repr_sum_;
  nn::Vector word_sum_;
  std::size_t selected_ = 0;
  std::size_t words_ = 0;
};

double option_prob(const nn::Vector& state, const SelectorPolicy& policy);

/// log(1/n_r): stands in for the mean log-likelihood of an empty selection.
double default_empty_selection_value(std::size_t n_relations);

/// Mean log P(r|x) over the selected sentences, or empty_value when none are selected.
double bag_final_reward(std::span<const Sentence* const> selected, std::size_t relation,
                        const RelationLikelihood& model, double empty_value);

}  // namespace hrlme

#endif  // HRLME_SELECTOR_HPP
