#ifndef HRLME_BASELINES_HPP
#define HRLME_BASELINES_HPP

#include "hrlme/corpus.hpp"
#include "hrlme/extractor.hpp"

#include <vector>

namespace hrlme {

inline constexpr int kMaxNgram = 3;

/// Every contiguous span of 1..kMaxNgram tokens with no entity or PAD token.
std::vector<IndexSet> ngram_spans(const Sentence& sentence);

/// Highest-reward span; ties go to the shorter span, then the leftmost start.
/// Returns the empty mention unless some span beats the empty penalty.
MentionResult ngram_extract(const Sentence& sentence, const MentionScorer& scorer, SentenceRef ref = {});

/// A uniformly drawn span from ngram_spans, or empty when there is none.
MentionResult random_span_extract(const Sentence& sentence, const MentionScorer& scorer, nn::Rng& rng,
                                  SentenceRef ref = {});

}  // namespace hrlme

#endif  // HRLME_BASELINES_HPP
