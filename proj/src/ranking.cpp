#include "hrlme/ranking.hpp"

#include <algorithm>
#include <stdexcept>

namespace hrlme {

std::size_t MentionCounts::pair_count(const std::string& mention, std::size_t relation) const {
  auto it = n_mr.find({mention, relation});
  return it == n_mr.end() ? 0 : it->second;
}

std::size_t MentionCounts::mention_count(const std::string& mention) const {
  auto it = n_m.find(mention);
  return it == n_m.end() ? 0 : it->second;
}

std::size_t MentionCounts::relation_count(std::size_t relation) const {
  return relation < n_r.size() ? n_r[relation] : 0;
}

MentionCounts accumulate(std::span<const MentionResult> extractions, const Corpus& corpus) {
  MentionCounts counts;
  counts.n_r.assign(corpus.num_relations(), 0);
  for (const auto& bag : corpus.bags) {
    for (const auto& s : bag.sentences) {
      ++counts.n_r.at(s.relation_id);
    }
  }
  for (const auto& m : extractions) {
    if (m.indices.empty()) {
      continue;
    }
    const Sentence& s = corpus.bags.at(m.ref.bag).sentences.at(m.ref.sentence);
    const std::string surface = m.surface.empty() ? normalize_surface(s, m.indices) : m.surface;
    ++counts.n_mr[{surface, s.relation_id}];
    ++counts.n_m[surface];
  }
  return counts;
}

double mention_score(std::size_t n_mr, std::size_t n_r, std::size_t n_m) {
  if (n_r == 0 || n_m == 0) {
    return 0.0;
  }
  const double c = static_cast<double>(n_mr);
  return (c / static_cast<double>(n_r)) * (c / static_cast<double>(n_m));
}

double score(const std::string& mention, std::size_t relation, const MentionCounts& counts) {
  return mention_score(counts.pair_count(mention, relation), counts.relation_count(relation),
                       counts.mention_count(mention));
}

Lexicon top_n(const MentionCounts& counts, std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("top_n: N must be at least 1");
  }
  Lexicon lexicon(counts.n_r.size());
  for (const auto& [key, c] : counts.n_mr) {
    const auto& [mention, relation] = key;
    if (relation >= lexicon.size()) {
      lexicon.resize(relation + 1);
    }
    lexicon[relation].push_back({mention, score(mention, relation, counts), c});
  }
  for (auto& entries : lexicon) {
    std::sort(entries.begin(), entries.end(), [](const LexiconEntry& a, const LexiconEntry& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.count != b.count) return a.count > b.count;
      return a.mention < b.mention;
    });
    if (entries.size() > n) {
      entries.resize(n);
    }
  }
  return lexicon;
}

}  // namespace hrlme
