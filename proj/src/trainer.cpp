#include "hrlme/trainer.hpp"

#include <cmath>
#include <stdexcept>

namespace hrlme {

const char* mode_name(TrainMode mode) { return mode == TrainMode::kHrl ? "hrl" : "single"; }

TrainMode parse_mode(const std::string& name) {
  if (name == "hrl") return TrainMode::kHrl;
  if (name == "single") return TrainMode::kSingle;
  throw std::invalid_argument("unknown mode '" + name + "' (expected hrl or single)");
}

const FeatureBank::Entry& FeatureBank::lookup(const Sentence& sentence) const {
  auto it = cache_.find(&sentence);
  if (it != cache_.end()) {
    return it->second;
  }
  Entry e;
  e.encoded = estimator_.encode(sentence);
  e.repr = estimator_.forward(sentence).repr;
  return cache_.emplace(&sentence, std::move(e)).first->second;
}

double EpisodeContext::empty_selection_value() const {
  return config.empty_selection_value.value_or(default_empty_selection_value(num_relations()));
}

namespace {

Trajectory rollout_bag(const Bag& bag, const SelectorPolicy& selector, const ExtractorPolicy& extractor,
                       ExtractorPolicy* update_target, const EpisodeContext& ctx, nn::Rng* rng, ActionMode mode,
                       double* extractor_baseline) {
  if (bag.sentences.empty()) {
    throw std::invalid_argument("run_bag_episode: empty bag");
  }
  if (mode == ActionMode::kSample && rng == nullptr) {
    throw std::invalid_argument("run_bag_episode: sample mode needs an rng");
  }
  const CnnEstimator& est = ctx.features.estimator();
  const std::size_t n_r = ctx.num_relations();
  const Eigen::Index dw = est.word_dim();
  const bool single = ctx.config.mode == TrainMode::kSingle;

  SelectorStateTracker tracker(est.feature_maps(), dw, bag.relation_id, n_r);
  std::vector<const Sentence*> selected;
  Trajectory traj;
  traj.steps.reserve(bag.sentences.size());
  for (const Sentence& sentence : bag.sentences) {
    const nn::Vector& repr = ctx.features.repr(sentence);
    SentenceStep step;
    step.selector_state = tracker.state(repr);
    if (single) {
      step.option = true;
    } else {
      step.option_prob = selector.prob(step.selector_state);
      step.option = mode == ActionMode::kSample ? rng->bernoulli(step.option_prob) : step.option_prob > 0.5;
      step.option_log_prob = selector.log_prob(step.selector_state, step.option);
    }
    if (step.option) {
      tracker.add_selected(repr);
      selected.push_back(&sentence);
      const nn::Matrix& encoded = ctx.features.encoded(sentence);
      ExtractorRollout rollout = sample_mention(sentence, encoded, extractor, n_r, rng, mode);
      rollout.mention.reward = ctx.scorer.reward(sentence, rollout.mention.indices);
      step.intermediate_reward = rollout.mention.reward;
      for (int k : rollout.mention.indices) {
        tracker.add_mention_word(encoded.row(k).head(dw).transpose());
      }
      if (update_target != nullptr) {
        const bool use_baseline = ctx.config.use_baseline;
        reinforce_update_extractor(std::span<const ExtractorRollout>(&rollout, 1), *update_target,
                                   ctx.config.lr_hrl, use_baseline ? *extractor_baseline : 0.0);
        if (use_baseline) {
          const double d = ctx.config.baseline_decay;
          *extractor_baseline = d * *extractor_baseline + (1.0 - d) * rollout.mention.reward;
        }
      }
      step.extraction = std::move(rollout);
    }
    traj.steps.push_back(std::move(step));
  }
  traj.final_reward =
      bag_final_reward(selected, bag.relation_id, ctx.scorer.likelihood(), ctx.empty_selection_value());
  return traj;
}

}  // namespace

Trajectory run_bag_episode(const Bag& bag, const SelectorPolicy& selector, const ExtractorPolicy& extractor,
                           const EpisodeContext& ctx, nn::Rng* rng, ActionMode mode) {
  return rollout_bag(bag, selector, extractor, nullptr, ctx, rng, mode, nullptr);
}

Trajectory run_bag_episode_training(const Bag& bag, const SelectorPolicy& selector, ExtractorPolicy& extractor,
                                    const EpisodeContext& ctx, nn::Rng& rng, double& extractor_baseline) {
  return rollout_bag(bag, selector, extractor, &extractor, ctx, &rng, ActionMode::kSample, &extractor_baseline);
}

double selector_return(const Trajectory& trajectory, std::size_t t, double gamma) {
  if (t >= trajectory.steps.size()) {
    throw std::out_of_range("selector_return: step " + std::to_string(t) + " out of range");
  }
  double discounted = 0.0;
  for (std::size_t k = trajectory.steps.size(); k-- > t;) {
    discounted = trajectory.steps[k].intermediate_reward + gamma * discounted;
  }
  return trajectory.final_reward + discounted;
}

nn::Vector selector_gradient(const Trajectory& trajectory, double gamma, Eigen::Index state_dim, double baseline) {
  nn::Vector g = nn::Vector::Zero(state_dim + 1);
  for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
    const SentenceStep& step = trajectory.steps[t];
    const double advantage = selector_return(trajectory, t, gamma) - baseline;
    g += advantage * score_gradient(step.selector_state, step.option, step.option_prob);
  }
  return g;
}

nn::Vector trajectory_extractor_gradient(const Trajectory& trajectory, Eigen::Index state_dim) {
  nn::Vector g = nn::Vector::Zero(state_dim + 1);
  for (const auto& step : trajectory.steps) {
    if (step.extraction) {
      g += extractor_gradient(*step.extraction, step.extraction->mention.reward, state_dim);
    }
  }
  return g;
}

void reinforce_update_selector(std::span<const Trajectory> trajectories, SelectorPolicy& policy, double gamma,
                               double lr, double baseline) {
  if (trajectories.empty()) {
    return;
  }
  nn::Vector g = nn::Vector::Zero(policy.state_dim() + 1);
  for (const auto& traj : trajectories) {
    g += selector_gradient(traj, gamma, policy.state_dim(), baseline);
  }
  g /= static_cast<double>(trajectories.size());
  ascend(policy, g, lr);
}

namespace {

struct Decision {
  nn::Vector state;
  bool action = false;
  double prob_one = 0.5;
};

// Depth-first walk over every option/action assignment, weighting each
// complete assignment's REINFORCE direction by its probability.
class ExhaustiveWalker {
 public:
  ExhaustiveWalker(const Bag& bag, const SelectorPolicy& selector, const ExtractorPolicy& extractor,
                   const EpisodeContext& ctx)
      : bag_(bag),
        selector_(selector),
        extractor_(extractor),
        ctx_(ctx),
        single_(ctx.config.mode == TrainMode::kSingle),
        n_(bag.sentences.size()),
        options_(n_),
        intermediate_(n_, 0.0),
        extractions_(n_) {
    result_.selector = nn::Vector::Zero(selector.state_dim() + 1);
    result_.extractor = nn::Vector::Zero(extractor.state_dim() + 1);
  }

  ExactGradient run() {
    const CnnEstimator& est = ctx_.features.estimator();
    SelectorStateTracker tracker(est.feature_maps(), est.word_dim(), bag_.relation_id, ctx_.num_relations());
    visit_sentence(0, tracker, 1.0);
    return std::move(result_);
  }

 private:
  void visit_sentence(std::size_t t, const SelectorStateTracker& tracker, double prob) {
    if (t == n_) {
      leaf(prob);
      return;
    }
    const nn::Vector& repr = ctx_.features.repr(bag_.sentences[t]);
    const nn::Vector state = tracker.state(repr);
    if (single_) {
      options_[t] = Decision{state, true, 1.0};
      take_option(t, tracker, repr, prob);
      return;
    }
    const double p = selector_.prob(state);
    options_[t] = Decision{state, false, p};
    intermediate_[t] = 0.0;
    extractions_[t].clear();
    visit_sentence(t + 1, tracker, prob * (1.0 - p));
    options_[t] = Decision{state, true, p};
    take_option(t, tracker, repr, prob * p);
  }

  void take_option(std::size_t t, const SelectorStateTracker& tracker, const nn::Vector& repr, double prob) {
    SelectorStateTracker next = tracker;
    next.add_selected(repr);
    selected_.push_back(&bag_.sentences[t]);
    extractions_[t].clear();
    const Sentence& sentence = bag_.sentences[t];
    IndexSet kept;
    visit_token(t, sentence.candidate_indices(), 0, kept, next, prob);
    selected_.pop_back();
  }

  void visit_token(std::size_t t, const std::vector<int>& candidates, std::size_t c, IndexSet& kept,
                   const SelectorStateTracker& tracker, double prob) {
    const Sentence& sentence = bag_.sentences[t];
    const nn::Matrix& encoded = ctx_.features.encoded(sentence);
    const Eigen::Index dw = extractor_.word_dim();
    if (c == candidates.size()) {
      intermediate_[t] = ctx_.scorer.reward(sentence, kept);
      SelectorStateTracker next = tracker;
      for (int k : kept) {
        next.add_mention_word(encoded.row(k).head(dw).transpose());
      }
      visit_sentence(t + 1, next, prob);
      return;
    }
    nn::Vector chosen_avg = nn::Vector::Zero(dw);
    for (int k : kept) {
      chosen_avg += encoded.row(k).head(dw).transpose();
    }
    if (!kept.empty()) {
      chosen_avg /= static_cast<double>(kept.size());
    }
    const int j = candidates[c];
    const nn::Vector state = extractor_state(encoded, j, chosen_avg, sentence.relation_id, ctx_.num_relations());
    const double p = extractor_.prob(state);

    extractions_[t].push_back(Decision{state, false, p});
    visit_token(t, candidates, c + 1, kept, tracker, prob * (1.0 - p));
    extractions_[t].back().action = true;
    kept.push_back(j);
    visit_token(t, candidates, c + 1, kept, tracker, prob * p);
    kept.pop_back();
    extractions_[t].pop_back();
  }

  void leaf(double prob) {
    ++result_.assignments;
    result_.total_probability += prob;
    const double final_reward = bag_final_reward(selected_, bag_.relation_id, ctx_.scorer.likelihood(),
                                                 ctx_.empty_selection_value());
    const double gamma = ctx_.config.gamma;
    double discounted = 0.0;
    for (std::size_t t = n_; t-- > 0;) {
      discounted = intermediate_[t] + gamma * discounted;
      if (!single_) {
        const Decision& d = options_[t];
        result_.selector += prob * (final_reward + discounted) * score_gradient(d.state, d.action, d.prob_one);
      }
      if (options_[t].action) {
        for (const Decision& d : extractions_[t]) {
          result_.extractor += prob * intermediate_[t] * score_gradient(d.state, d.action, d.prob_one);
        }
      }
    }
  }

  const Bag& bag_;
  const SelectorPolicy& selector_;
  const ExtractorPolicy& extractor_;
  const EpisodeContext& ctx_;
  bool single_;
  std::size_t n_;
  std::vector<Decision> options_;
  std::vector<double> intermediate_;
  std::vector<std::vector<Decision>> extractions_;
  std::vector<const Sentence*> selected_;
  ExactGradient result_;
};

}  // namespace

ExactGradient exhaustive_policy_gradient(const Bag& bag, const SelectorPolicy& selector,
                                         const ExtractorPolicy& extractor, const EpisodeContext& ctx) {
  if (bag.sentences.empty()) {
    throw std::invalid_argument("exhaustive_policy_gradient: empty bag");
  }
  std::size_t decisions = ctx.config.mode == TrainMode::kSingle ? 0 : bag.sentences.size();
  for (const auto& s : bag.sentences) {
    decisions += s.candidate_indices().size();
  }
  if (decisions > kMaxExhaustiveDecisions) {
    throw std::invalid_argument("exhaustive_policy_gradient: " + std::to_string(decisions) +
                                " decisions exceed the limit of " + std::to_string(kMaxExhaustiveDecisions));
  }
  return ExhaustiveWalker(bag, selector, extractor, ctx).run();
}

TrainLog train_hrl(const Corpus& corpus, SelectorPolicy& selector, ExtractorPolicy& extractor,
                   const FeatureBank& features, const MentionScorer& scorer, const TrainConfig& config) {
  const EpisodeContext ctx{features, scorer, config};
  const bool hrl = config.mode == TrainMode::kHrl;
  std::vector<std::size_t> order;
  for (std::size_t b = 0; b < corpus.bags.size(); ++b) {
    if (corpus.bags[b].split == Split::kTrain && !corpus.bags[b].sentences.empty()) {
      order.push_back(b);
    }
  }
  const std::size_t k_traj = std::max<std::size_t>(config.trajectories_per_bag, 1);
  nn::Rng rng(config.seed);
  double selector_baseline = 0.0;
  double extractor_baseline = 0.0;
  TrainLog log;

  for (std::size_t episode = 0; episode < config.episodes; ++episode) {
    rng.shuffle(order);
    double sum_final = 0.0;
    double sum_l = 0.0;
    std::size_t n_l = 0;
    std::size_t pos_seen = 0, pos_selected = 0, noise_seen = 0, noise_selected = 0;
    std::vector<Trajectory> trajectories(k_traj);

    for (std::size_t b : order) {
      const Bag& bag = corpus.bags[b];
      double return_sum = 0.0;
      std::size_t return_count = 0;
      for (auto& traj : trajectories) {
        traj = run_bag_episode_training(bag, selector, extractor, ctx, rng, extractor_baseline);
        sum_final += traj.final_reward;
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
          const SentenceStep& step = traj.steps[t];
          const bool noise = bag.sentences[t].is_noise.value_or(false);
          (noise ? noise_seen : pos_seen) += 1;
          if (step.option) {
            (noise ? noise_selected : pos_selected) += 1;
            sum_l += step.intermediate_reward;
            ++n_l;
          }
          if (config.use_baseline) {
            return_sum += selector_return(traj, t, config.gamma);
            ++return_count;
          }
        }
      }
      if (hrl) {
        reinforce_update_selector(trajectories, selector, config.gamma, config.lr_hrl,
                                  config.use_baseline ? selector_baseline : 0.0);
      }
      if (config.use_baseline && return_count > 0) {
        const double d = config.baseline_decay;
        selector_baseline = d * selector_baseline + (1.0 - d) * return_sum / static_cast<double>(return_count);
      }
    }

    EpisodeMetrics m;
    m.episode = episode;
    const std::size_t n_traj = order.size() * k_traj;
    m.mean_final_reward_h = n_traj == 0 ? 0.0 : sum_final / static_cast<double>(n_traj);
    m.mean_reward_l = n_l == 0 ? 0.0 : sum_l / static_cast<double>(n_l);
    m.selection_rate_positive = pos_seen == 0 ? 0.0 : static_cast<double>(pos_selected) / static_cast<double>(pos_seen);
    m.selection_rate_noise =
        noise_seen == 0 ? 0.0 : static_cast<double>(noise_selected) / static_cast<double>(noise_seen);
    log.episodes.push_back(m);
  }
  return log;
}

Inference extract_greedy(const Corpus& corpus, const SelectorPolicy& selector, const ExtractorPolicy& extractor,
                         const FeatureBank& features, const MentionScorer& scorer, TrainMode mode,
                         std::optional<Split> split) {
  TrainConfig config;
  config.mode = mode;
  config.weights = scorer.weights();
  const EpisodeContext ctx{features, scorer, config};
  Inference out;
  for (std::size_t b = 0; b < corpus.bags.size(); ++b) {
    const Bag& bag = corpus.bags[b];
    if ((split && bag.split != *split) || bag.sentences.empty()) {
      continue;
    }
    Trajectory traj = run_bag_episode(bag, selector, extractor, ctx, nullptr, ActionMode::kGreedy);
    SelectionTrace trace;
    trace.bag = b;
    trace.final_reward = traj.final_reward;
    for (std::size_t s = 0; s < traj.steps.size(); ++s) {
      SentenceStep& step = traj.steps[s];
      trace.options.push_back(step.option);
      if (step.extraction) {
        MentionResult m = std::move(step.extraction->mention);
        m.ref = SentenceRef{b, s};
        out.extractions.push_back(std::move(m));
      }
    }
    out.traces.push_back(std::move(trace));
  }
  return out;
}

}  // namespace hrlme
