#include "hrlme/selector.hpp"

#include <cmath>

namespace hrlme {

SelectorStateTracker::SelectorStateTracker(Eigen::Index repr_dim, Eigen::Index word_dim, std::size_t relation,
                                           std::size_t n_relations)
    : relation_(relation),
      n_relations_(n_relations),
      repr_sum_(nn::Vector::Zero(repr_dim)),
      word_sum_(nn::Vector::Zero(word_dim)) {}

nn::Vector SelectorStateTracker::chosen_avg_repr() const {
  return selected_ == 0 ? nn::Vector(nn::Vector::Zero(repr_sum_.size()))
                        : nn::Vector(repr_sum_ / static_cast<double>(selected_));
}

nn::Vector SelectorStateTracker::mention_avg() const {
  return words_ == 0 ? nn::Vector(nn::Vector::Zero(word_sum_.size()))
                     : nn::Vector(word_sum_ / static_cast<double>(words_));
}

nn::Vector SelectorStateTracker::state(const nn::Vector& current_repr) const {
  const Eigen::Index dr = repr_sum_.size();
  const Eigen::Index dw = word_sum_.size();
  const auto nr = static_cast<Eigen::Index>(n_relations_);
  nn::Vector s = nn::Vector::Zero(2 * dr + nr + dw);
  s.head(dr) = current_repr;
  s.segment(dr, dr) = chosen_avg_repr();
  s(2 * dr + static_cast<Eigen::Index>(relation_)) = 1.0;
  s.tail(dw) = mention_avg();
  return s;
}

void SelectorStateTracker::add_selected(const nn::Vector& repr) {
  repr_sum_ += repr;
  ++selected_;
}

void SelectorStateTracker::add_mention_word(const nn::Vector& word_embedding) {
  word_sum_ += word_embedding;
  ++words_;
}

double option_prob(const nn::Vector& state, const SelectorPolicy& policy) { return policy.prob(state); }

double default_empty_selection_value(std::size_t n_relations) {
  return std::log(1.0 / static_cast<double>(n_relations));
}

double bag_final_reward(std::span<const Sentence* const> selected, std::size_t relation,
                        const RelationLikelihood& model, double empty_value) {
  if (selected.empty()) {
    return empty_value;
  }
  double total = 0.0;
  for (const Sentence* s : selected) {
    total += std::log(model.prob_of(*s, relation));
  }
  return total / static_cast<double>(selected.size());
}

}  // namespace hrlme
