#ifndef HRLME_CORPUS_HPP
#define HRLME_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hrlme {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr int kMinSentenceLength = 3;

/// Relative offsets are clipped to [-kMaxOffset, kMaxOffset] and shifted to [0, 2*kMaxOffset].
inline constexpr int kMaxOffset = 30;
inline constexpr int kNumPositionBuckets = 2 * kMaxOffset + 1;

enum class Split { kTrain, kTest };

const char* split_name(Split split);
Split parse_split(const std::string& name);

using IndexSet = std::vector<int>;

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<int> token_ids;
  int head_idx = 0;
  int tail_idx = 1;
  std::size_t relation_id = 0;
  /// For synthetic data the first entry is the planted phrase; the rest are
  /// acceptable contiguous sub-phrases that keep its key word.
  std::optional<std::vector<IndexSet>> gold_mentions;
  std::optional<bool> is_noise;
  Split split = Split::kTrain;

  std::size_t size() const { return token_ids.size(); }
  bool is_entity(int j) const { return j == head_idx || j == tail_idx; }
  /// Non-entity, non-PAD positions.
  std::vector<int> candidate_indices() const;

  bool operator==(const Sentence&) const = default;
};

struct Bag {
  std::size_t relation_id = 0;
  Split split = Split::kTrain;
  std::vector<Sentence> sentences;

  bool operator==(const Bag&) const = default;
};

/// Case-folded token table; ids 0 and 1 are PAD and UNK.
class Vocabulary {
 public:
  Vocabulary();

  int add(const std::string& token);
  /// UNK for unseen tokens, PAD for the pad marker.
  int id_of(const std::string& token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct Corpus {
  std::vector<Bag> bags;
  Vocabulary vocabulary;
  std::vector<std::string> relations;

  std::size_t num_relations() const { return relations.size(); }
  std::size_t relation_index(const std::string& name) const;
  std::size_t num_sentences() const;

  bool operator==(const Corpus&) const = default;
};

/// Addresses one sentence inside a corpus.
struct SentenceRef {
  std::size_t bag = 0;
  std::size_t sentence = 0;

  bool operator==(const SentenceRef&) const = default;
  auto operator<=>(const SentenceRef&) const = default;
};

struct PositionFeatures {
  std::vector<int> head;
  std::vector<int> tail;
};

int position_bucket(int position, int entity_idx);
PositionFeatures position_buckets(const Sentence& sentence);

std::string fold_case(const std::string& token);
/// Case-folded tokens at the given indices, joined by single spaces.
std::string normalize_surface(const Sentence& sentence, std::span<const int> indices);

/// One input line before grouping into bags.
struct Record {
  std::vector<std::string> tokens;
  int head = 0;
  int tail = 0;
  std::string relation;
  std::optional<std::vector<IndexSet>> gold_mentions;
  std::optional<bool> is_noise;
  Split split = Split::kTrain;
};

/// Groups records into bags keyed by (head surface, tail surface, relation,
/// split), pads short sentences, and builds the vocabulary from train tokens.
/// Relations are ordered by name.
Corpus assemble_corpus(const std::vector<Record>& records);

Corpus read_jsonl(std::istream& in);
Corpus load_jsonl(const std::filesystem::path& path);
void write_jsonl(const Corpus& corpus, std::ostream& out);
void save_jsonl(const Corpus& corpus, const std::filesystem::path& path);

struct SyntheticConfig {
  std::size_t n_relations = 5;
  std::size_t mentions_per_relation = 4;
  std::size_t bags = 200;
  std::size_t sentences_per_bag = 4;
  double noise_ratio = 0.0;
  /// Share of noise sentences that carry another relation's phrase; the
  /// rest carry no relation phrase at all.
  double other_phrase_share = 0.0;
  double test_fraction = 0.2;
  std::size_t max_sentence_length = 8;
  std::size_t entity_pool = 40;
  std::size_t filler_pool = 40;
  std::uint64_t seed = 1;
};

Corpus generate_synthetic(const SyntheticConfig& config);

/// Per relation, the normalized surfaces of every gold mention on non-noise sentences.
std::vector<std::vector<std::string>> gold_lexicons(const Corpus& corpus);

}  // namespace hrlme

#endif  // HRLME_CORPUS_HPP
