#include "hrlme/extractor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace hrlme {

RewardWeights preset_weights(const std::string& preset) {
  if (preset == "noisy") {
    return RewardWeights{};
  }
  if (preset == "clean") {
    return RewardWeights{1.0, 0.05, -1.0};
  }
  throw std::invalid_argument("unknown preset '" + preset + "' (expected clean or noisy)");
}

nn::Vector extractor_state(const nn::Matrix& encoded, Eigen::Index j, const nn::Vector& chosen_avg,
                           std::size_t relation, std::size_t n_relations) {
  const Eigen::Index d = encoded.cols();
  const Eigen::Index dw = chosen_avg.size();
  nn::Vector s = nn::Vector::Zero(d + dw + static_cast<Eigen::Index>(n_relations));
  s.head(d) = encoded.row(j).transpose();
  s.segment(d, dw) = chosen_avg;
  s(d + dw + static_cast<Eigen::Index>(relation)) = 1.0;
  return s;
}

double act_prob(const nn::Vector& state, const ExtractorPolicy& policy) { return policy.prob(state); }

double ExtractorRollout::log_prob() const {
  double total = 0.0;
  for (const auto& step : steps) {
    total += step.log_prob;
  }
  return total;
}

ExtractorRollout sample_mention(const Sentence& sentence, const nn::Matrix& encoded, const ExtractorPolicy& policy,
                                std::size_t n_relations, nn::Rng* rng, ActionMode mode) {
  if (mode == ActionMode::kSample && rng == nullptr) {
    throw std::invalid_argument("sample_mention: sample mode needs an rng");
  }
  const Eigen::Index dw = policy.word_dim();
  ExtractorRollout out;
  nn::Vector chosen_sum = nn::Vector::Zero(dw);
  for (int j = 0; j < static_cast<int>(sentence.size()); ++j) {
    if (sentence.is_entity(j) || sentence.token_ids[static_cast<std::size_t>(j)] == kPadId) {
      continue;
    }
    const std::size_t kept = out.mention.indices.size();
    const nn::Vector chosen_avg = kept == 0 ? nn::Vector(nn::Vector::Zero(dw)) : nn::Vector(chosen_sum / static_cast<double>(kept));
    ExtractorStep step;
    step.position = j;
    step.state = extractor_state(encoded, j, chosen_avg, sentence.relation_id, n_relations);
    step.prob_one = policy.prob(step.state);
    step.action = mode == ActionMode::kSample ? rng->bernoulli(step.prob_one) : step.prob_one > 0.5;
    step.log_prob = policy.log_prob(step.state, step.action);
    if (step.action) {
      out.mention.indices.push_back(j);
      chosen_sum += encoded.row(j).head(dw).transpose();
    }
    out.steps.push_back(std::move(step));
  }
  out.mention.surface = normalize_surface(sentence, out.mention.indices);
  return out;
}

ExtractorRollout sample_mention(const Sentence& sentence, const ExtractorPolicy& policy,
                                const CnnEstimator& estimator, nn::Rng* rng, ActionMode mode) {
  return sample_mention(sentence, estimator.encode(sentence), policy, estimator.num_relations(), rng, mode);
}

Sentence remove_tokens(const Sentence& sentence, std::span<const int> indices) {
  Sentence out;
  out.relation_id = sentence.relation_id;
  out.split = sentence.split;
  int removed_before_head = 0;
  int removed_before_tail = 0;
  std::size_t next = 0;
  for (int j = 0; j < static_cast<int>(sentence.size()); ++j) {
    if (next < indices.size() && indices[next] == j) {
      ++next;
      removed_before_head += j < sentence.head_idx ? 1 : 0;
      removed_before_tail += j < sentence.tail_idx ? 1 : 0;
      continue;
    }
    out.tokens.push_back(sentence.tokens[static_cast<std::size_t>(j)]);
    out.token_ids.push_back(sentence.token_ids[static_cast<std::size_t>(j)]);
  }
  while (out.token_ids.size() < static_cast<std::size_t>(kMinSentenceLength)) {
    out.tokens.emplace_back(kPadToken);
    out.token_ids.push_back(kPadId);
  }
  out.head_idx = sentence.head_idx - removed_before_head;
  out.tail_idx = sentence.tail_idx - removed_before_tail;
  return out;
}

namespace {

void check_indices(const Sentence& sentence, std::span<const int> indices) {
  for (std::size_t q = 0; q < indices.size(); ++q) {
    const int k = indices[q];
    if (k < 0 || k >= static_cast<int>(sentence.size())) {
      throw std::out_of_range("mention index " + std::to_string(k) + " out of range");
    }
    if (sentence.is_entity(k)) {
      throw std::invalid_argument("mention index " + std::to_string(k) + " is an entity");
    }
    if (q > 0 && indices[q - 1] >= k) {
      throw std::invalid_argument("mention indices must be strictly increasing");
    }
  }
}

}  // namespace

double mention_reward(const Sentence& sentence, std::span<const int> indices, const RelationLikelihood& model,
                      const RewardWeights& weights) {
  if (indices.empty()) {
    return weights.empty_penalty;
  }
  check_indices(sentence, indices);
  const double length = static_cast<double>(indices.size());
  const double p_full = model.prob_of(sentence, sentence.relation_id);
  const double p_removed = model.prob_of(remove_tokens(sentence, indices), sentence.relation_id);

  const double discriminability = (p_full - p_removed) / p_full;
  const double continuity = static_cast<double>(indices.back() - indices.front()) / length;
  double distance = 0.0;
  for (int k : indices) {
    distance += std::abs(k - sentence.head_idx) + std::abs(k - sentence.tail_idx);
  }
  distance /= length;
  return discriminability - weights.lambda1 * continuity - weights.lambda2 * distance;
}

double CachedLikelihood::prob_of(const Sentence& sentence, std::size_t relation) const {
  std::string key;
  key.reserve(4 * (sentence.token_ids.size() + 3));
  auto put = [&key](std::uint32_t v) { key.append(reinterpret_cast<const char*>(&v), sizeof(v)); };
  put(static_cast<std::uint32_t>(relation));
  put(static_cast<std::uint32_t>(sentence.head_idx));
  put(static_cast<std::uint32_t>(sentence.tail_idx));
  for (int id : sentence.token_ids) {
    put(static_cast<std::uint32_t>(id));
  }
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    return it->second;
  }
  const double p = model_.prob_of(sentence, relation);
  cache_.emplace(std::move(key), p);
  return p;
}

MentionResult make_mention(const Sentence& sentence, IndexSet indices, const MentionScorer& scorer,
                           SentenceRef ref) {
  MentionResult m;
  m.ref = ref;
  m.reward = scorer.reward(sentence, indices);
  m.surface = normalize_surface(sentence, indices);
  m.indices = std::move(indices);
  return m;
}

namespace {

// Strict "a beats b" under the shared tie rules.
bool better(double reward_a, const IndexSet& a, double reward_b, const IndexSet& b) {
  if (reward_a != reward_b) return reward_a > reward_b;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

MentionResult brute_force_best(const Sentence& sentence, const MentionScorer& scorer, std::size_t max_len,
                               bool contiguous_only) {
  const std::vector<int> candidates = sentence.candidate_indices();
  if (candidates.size() > kMaxBruteForceCandidates) {
    throw std::invalid_argument("brute_force_best: " + std::to_string(candidates.size()) +
                                " candidates exceed the limit of " + std::to_string(kMaxBruteForceCandidates));
  }
  IndexSet best;
  double best_reward = scorer.weights().empty_penalty;
  const std::uint32_t limit = 1u << candidates.size();
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > max_len) {
      continue;
    }
    IndexSet subset;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (mask & (1u << i)) subset.push_back(candidates[i]);
    }
    if (contiguous_only && subset.back() - subset.front() + 1 != static_cast<int>(subset.size())) {
      continue;
    }
    const double r = scorer.reward(sentence, subset);
    if (better(r, subset, best_reward, best)) {
      best_reward = r;
      best = std::move(subset);
    }
  }
  return make_mention(sentence, std::move(best), scorer);
}

nn::Vector extractor_gradient(const ExtractorRollout& rollout, double reward, Eigen::Index state_dim) {
  nn::Vector g = nn::Vector::Zero(state_dim + 1);
  if (reward == 0.0) {
    return g;
  }
  for (const auto& step : rollout.steps) {
    g += score_gradient(step.state, step.action, step.prob_one);
  }
  return reward * g;
}

void reinforce_update_extractor(std::span<const ExtractorRollout> rollouts, ExtractorPolicy& policy, double lr,
                                double baseline) {
  if (rollouts.empty()) {
    return;
  }
  nn::Vector g = nn::Vector::Zero(policy.state_dim() + 1);
  for (const auto& r : rollouts) {
    g += extractor_gradient(r, r.mention.reward - baseline, policy.state_dim());
  }
  g /= static_cast<double>(rollouts.size());
  ascend(policy, g, lr);
}

PretrainLog pretrain_extractor(const Corpus& corpus, ExtractorPolicy& policy, const CnnEstimator& estimator,
                               const MentionScorer& scorer, const PretrainOptions& options) {
  if (!estimator.frozen()) {
    throw std::logic_error("pretrain_extractor: estimator must be frozen");
  }
  std::vector<SentenceRef> refs;
  for (std::size_t b = 0; b < corpus.bags.size(); ++b) {
    if (corpus.bags[b].split != Split::kTrain) continue;
    for (std::size_t s = 0; s < corpus.bags[b].sentences.size(); ++s) {
      refs.push_back({b, s});
    }
  }
  nn::Rng rng(options.seed);
  PretrainLog log;
  std::vector<nn::Matrix> encoded;
  encoded.reserve(refs.size());
  for (const auto& ref : refs) {
    encoded.push_back(estimator.encode(corpus.bags[ref.bag].sentences[ref.sentence]));
  }
  std::vector<std::size_t> order(refs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t samples = std::max<std::size_t>(options.samples_per_sentence, 1);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    std::vector<ExtractorRollout> rollouts(samples);
    for (std::size_t i : order) {
      const Sentence& sentence = corpus.bags[refs[i].bag].sentences[refs[i].sentence];
      double sentence_total = 0.0;
      for (auto& rollout : rollouts) {
        rollout = sample_mention(sentence, encoded[i], policy, estimator.num_relations(), &rng, ActionMode::kSample);
        rollout.mention.reward = scorer.reward(sentence, rollout.mention.indices);
        sentence_total += rollout.mention.reward;
      }
      total += sentence_total;
      const double baseline = options.sample_mean_baseline ? sentence_total / static_cast<double>(samples) : 0.0;
      reinforce_update_extractor(rollouts, policy, options.lr, baseline);
    }
    log.epoch_reward.push_back(refs.empty() ? 0.0 : total / static_cast<double>(refs.size() * samples));
  }
  return log;
}

}  // namespace hrlme
