#ifndef HRLME_RANKING_HPP
#define HRLME_RANKING_HPP

#include "hrlme/corpus.hpp"
#include "hrlme/extractor.hpp"

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hrlme {

struct MentionCounts {
  /// (surface, relation) -> extractions of surface from sentences labeled relation.
  std::map<std::pair<std::string, std::size_t>, std::size_t> n_mr;
  /// relation -> number of corpus sentences labeled relation.
  std::vector<std::size_t> n_r;
  /// surface -> extractions across all relations.
  std::map<std::string, std::size_t> n_m;

  std::size_t pair_count(const std::string& mention, std::size_t relation) const;
  std::size_t mention_count(const std::string& mention) const;
  std::size_t relation_count(std::size_t relation) const;
};

/// Counts non-empty extractions; the relation of each comes from its sentence.
MentionCounts accumulate(std::span<const MentionResult> extractions, const Corpus& corpus);

/// (n_mr / n_r) * (n_mr / n_m); 0 when either denominator is 0.
double mention_score(std::size_t n_mr, std::size_t n_r, std::size_t n_m);
double score(const std::string& mention, std::size_t relation, const MentionCounts& counts);

struct LexiconEntry {
  std::string mention;
  double score = 0.0;
  std::size_t count = 0;

  bool operator==(const LexiconEntry&) const = default;
};

/// Indexed by relation id.
using Lexicon = std::vector<std::vector<LexiconEntry>>;

/// Per relation: score descending, then count descending, then surface ascending; at most n entries.
Lexicon top_n(const MentionCounts& counts, std::size_t n);

}  // namespace hrlme

#endif  // HRLME_RANKING_HPP
