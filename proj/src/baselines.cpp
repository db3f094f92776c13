#include "hrlme/baselines.hpp"

namespace hrlme {

std::vector<IndexSet> ngram_spans(const Sentence& sentence) {
  std::vector<IndexSet> spans;
  const int n = static_cast<int>(sentence.size());
  auto usable = [&sentence](int j) {
    return !sentence.is_entity(j) && sentence.token_ids[static_cast<std::size_t>(j)] != kPadId;
  };
  for (int len = 1; len <= kMaxNgram; ++len) {
    for (int start = 0; start + len <= n; ++start) {
      IndexSet span;
      for (int j = start; j < start + len && usable(j); ++j) {
        span.push_back(j);
      }
      if (static_cast<int>(span.size()) == len) {
        spans.push_back(std::move(span));
      }
    }
  }
  return spans;
}

MentionResult ngram_extract(const Sentence& sentence, const MentionScorer& scorer, SentenceRef ref) {
  // Spans come shortest first, then leftmost, so a strict comparison keeps the tie rule.
  IndexSet best;
  double best_reward = scorer.weights().empty_penalty;
  for (auto& span : ngram_spans(sentence)) {
    const double r = scorer.reward(sentence, span);
    if (r > best_reward) {
      best_reward = r;
      best = std::move(span);
    }
  }
  return make_mention(sentence, std::move(best), scorer, ref);
}

MentionResult random_span_extract(const Sentence& sentence, const MentionScorer& scorer, nn::Rng& rng,
                                  SentenceRef ref) {
  std::vector<IndexSet> spans = ngram_spans(sentence);
  if (spans.empty()) {
    return make_mention(sentence, {}, scorer, ref);
  }
  return make_mention(sentence, std::move(spans[rng.index(spans.size())]), scorer, ref);
}

}  // namespace hrlme
