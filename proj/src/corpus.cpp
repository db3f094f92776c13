#include "hrlme/corpus.hpp"

#include "hrlme/nnkit.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace hrlme {

using nlohmann::json;

const char* split_name(Split split) { return split == Split::kTrain ? "train" : "test"; }

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + name + "'");
}

std::vector<int> Sentence::candidate_indices() const {
  std::vector<int> out;
  for (int j = 0; j < static_cast<int>(token_ids.size()); ++j) {
    if (!is_entity(j) && token_ids[static_cast<std::size_t>(j)] != kPadId) {
      out.push_back(j);
    }
  }
  return out;
}

Vocabulary::Vocabulary() {
  add(kPadToken);
  add(kUnkToken);
}

int Vocabulary::add(const std::string& token) {
  const std::string key = fold_case(token);
  auto it = ids_.find(key);
  if (it != ids_.end()) {
    return it->second;
  }
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(key);
  ids_.emplace(key, id);
  return id;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = ids_.find(fold_case(token));
  return it == ids_.end() ? kUnkId : it->second;
}

std::size_t Corpus::relation_index(const std::string& name) const {
  auto it = std::find(relations.begin(), relations.end(), name);
  if (it == relations.end()) {
    throw std::out_of_range("unknown relation '" + name + "'");
  }
  return static_cast<std::size_t>(it - relations.begin());
}

std::size_t Corpus::num_sentences() const {
  std::size_t n = 0;
  for (const auto& bag : bags) {
    n += bag.sentences.size();
  }
  return n;
}

int position_bucket(int position, int entity_idx) {
  return std::clamp(position - entity_idx, -kMaxOffset, kMaxOffset) + kMaxOffset;
}

PositionFeatures position_buckets(const Sentence& sentence) {
  PositionFeatures pf;
  const int n = static_cast<int>(sentence.size());
  pf.head.reserve(static_cast<std::size_t>(n));
  pf.tail.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    pf.head.push_back(position_bucket(j, sentence.head_idx));
    pf.tail.push_back(position_bucket(j, sentence.tail_idx));
  }
  return pf;
}

std::string fold_case(const std::string& token) {
  std::string out = token;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string normalize_surface(const Sentence& sentence, std::span<const int> indices) {
  std::string out;
  for (int k : indices) {
    if (!out.empty()) {
      out += ' ';
    }
    out += fold_case(sentence.tokens.at(static_cast<std::size_t>(k)));
  }
  return out;
}

Corpus assemble_corpus(const std::vector<Record>& records) {
  Corpus corpus;
  std::set<std::string> names;
  for (const auto& r : records) {
    names.insert(r.relation);
  }
  corpus.relations.assign(names.begin(), names.end());

  for (const auto& r : records) {
    if (r.split == Split::kTrain) {
      for (const auto& tok : r.tokens) {
        if (tok != kPadToken) {
          corpus.vocabulary.add(tok);
        }
      }
    }
  }

  std::map<std::tuple<std::string, std::string, std::size_t, Split>, std::size_t> bag_of;
  for (const auto& r : records) {
    Sentence s;
    s.tokens = r.tokens;
    while (s.tokens.size() < static_cast<std::size_t>(kMinSentenceLength)) {
      s.tokens.emplace_back(kPadToken);
    }
    for (const auto& tok : s.tokens) {
      s.token_ids.push_back(corpus.vocabulary.id_of(tok));
    }
    s.head_idx = r.head;
    s.tail_idx = r.tail;
    s.relation_id = corpus.relation_index(r.relation);
    s.gold_mentions = r.gold_mentions;
    s.is_noise = r.is_noise;
    s.split = r.split;

    auto key = std::make_tuple(r.tokens.at(static_cast<std::size_t>(r.head)),
                               r.tokens.at(static_cast<std::size_t>(r.tail)), s.relation_id, r.split);
    auto [it, inserted] = bag_of.emplace(key, corpus.bags.size());
    if (inserted) {
      Bag bag;
      bag.relation_id = s.relation_id;
      bag.split = r.split;
      corpus.bags.push_back(std::move(bag));
    }
    corpus.bags[it->second].sentences.push_back(std::move(s));
  }
  return corpus;
}

namespace {

Record parse_record(const std::string& line, std::size_t line_no) {
  auto fail = [line_no](const std::string& what) {
    return std::runtime_error("line " + std::to_string(line_no) + ": " + what);
  };
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw fail(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw fail("expected a JSON object");
  }
  Record r;
  try {
    for (const char* key : {"tokens", "head", "tail", "relation"}) {
      if (!j.contains(key)) {
        throw fail(std::string("missing key '") + key + "'");
      }
    }
    r.tokens = j.at("tokens").get<std::vector<std::string>>();
    r.head = j.at("head").get<int>();
    r.tail = j.at("tail").get<int>();
    r.relation = j.at("relation").get<std::string>();
    if (j.contains("gold_mentions")) {
      r.gold_mentions = j.at("gold_mentions").get<std::vector<IndexSet>>();
    }
    if (j.contains("is_noise")) {
      r.is_noise = j.at("is_noise").get<bool>();
    }
    if (j.contains("split")) {
      r.split = parse_split(j.at("split").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw fail(std::string("bad field type: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw fail(e.what());
  }

  const int n = static_cast<int>(r.tokens.size());
  if (n == 0) {
    throw fail("empty token list");
  }
  if (r.head < 0 || r.head >= n) {
    throw fail("head index " + std::to_string(r.head) + " out of range");
  }
  if (r.tail < 0 || r.tail >= n) {
    throw fail("tail index " + std::to_string(r.tail) + " out of range");
  }
  if (r.head == r.tail) {
    throw fail("head and tail share index " + std::to_string(r.head));
  }
  if (r.gold_mentions) {
    for (const auto& set : *r.gold_mentions) {
      for (int k : set) {
        if (k < 0 || k >= n) {
          throw fail("gold mention index " + std::to_string(k) + " out of range");
        }
      }
    }
  }
  return r;
}

json record_json(const Corpus& corpus, const Sentence& s) {
  json j;
  j["tokens"] = s.tokens;
  j["head"] = s.head_idx;
  j["tail"] = s.tail_idx;
  j["relation"] = corpus.relations.at(s.relation_id);
  if (s.gold_mentions) {
    j["gold_mentions"] = *s.gold_mentions;
  }
  if (s.is_noise) {
    j["is_noise"] = *s.is_noise;
  }
  j["split"] = split_name(s.split);
  return j;
}

}  // namespace

Corpus read_jsonl(std::istream& in) {
  std::vector<Record> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    records.push_back(parse_record(line, line_no));
  }
  return assemble_corpus(records);
}

Corpus load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open corpus " + path.string());
  }
  return read_jsonl(in);
}

void write_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& bag : corpus.bags) {
    for (const auto& s : bag.sentences) {
      out << record_json(corpus, s).dump() << '\n';
    }
  }
}

void save_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write corpus " + path.string());
  }
  write_jsonl(corpus, out);
}

namespace {

// Pronounceable pseudo-words, unique across every pool drawn from one generator.
class WordMaker {
 public:
  explicit WordMaker(nn::Rng& rng) : rng_(rng) {}

  std::string make(std::size_t syllables) {
    static constexpr std::string_view kOnsets = "bdfgklmnprstvz";
    static constexpr std::string_view kVowels = "aeiou";
    for (;;) {
      std::string w;
      for (std::size_t i = 0; i < syllables; ++i) {
        w += kOnsets[rng_.index(kOnsets.size())];
        w += kVowels[rng_.index(kVowels.size())];
      }
      if (used_.insert(w).second) {
        return w;
      }
    }
  }

  void reserve(const std::string& w) { used_.insert(w); }

 private:
  nn::Rng& rng_;
  std::set<std::string> used_;
};

struct Phrase {
  std::vector<std::string> words;
  std::size_t key = 0;
};

}  // namespace

Corpus generate_synthetic(const SyntheticConfig& config) {
  if (config.noise_ratio < 0.0 || config.noise_ratio >= 1.0) {
    throw std::invalid_argument("noise_ratio must lie in [0, 1)");
  }
  if (config.n_relations == 0 || config.mentions_per_relation == 0 || config.bags == 0 ||
      config.sentences_per_bag == 0) {
    throw std::invalid_argument("synthetic corpus counts must be positive");
  }
  if (config.max_sentence_length < 5) {
    throw std::invalid_argument("max_sentence_length must be at least 5");
  }

  nn::Rng rng(config.seed);
  WordMaker words(rng);

  std::vector<std::string> fillers;
  for (std::size_t i = 0; i < config.filler_pool; ++i) {
    fillers.push_back(words.make(2));
  }
  // A phrase is one relation-specific key word padded with filler words. The
  // key carries the evidence and anchors the acceptable sub-phrases.
  std::vector<std::vector<Phrase>> phrases(config.n_relations);
  for (auto& rel : phrases) {
    for (std::size_t m = 0; m < config.mentions_per_relation; ++m) {
      Phrase p;
      const std::size_t len = 1 + rng.index(3);
      p.key = len == 3 ? 1 : rng.index(len);
      for (std::size_t i = 0; i < len; ++i) {
        p.words.push_back(i == p.key ? words.make(3) : fillers[rng.index(fillers.size())]);
      }
      rel.push_back(std::move(p));
    }
  }
  std::vector<std::string> entities;
  for (std::size_t i = 0; i < config.entity_pool; ++i) {
    std::string e = words.make(3);
    e[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(e[0])));
    entities.push_back(e);
  }
  if (config.entity_pool < 2 || config.bags > config.entity_pool * (config.entity_pool - 1)) {
    throw std::invalid_argument("entity_pool too small for the requested number of bags");
  }

  char name[32];
  std::vector<std::string> relation_names;
  for (std::size_t r = 0; r < config.n_relations; ++r) {
    std::snprintf(name, sizeof(name), "rel_%02zu", r);
    relation_names.emplace_back(name);
  }

  auto filler = [&] { return fillers[rng.index(fillers.size())]; };
  const std::size_t cap = config.max_sentence_length;

  std::vector<Record> records;
  std::set<std::pair<std::size_t, std::size_t>> used_pairs;
  for (std::size_t b = 0; b < config.bags; ++b) {
    // The first bags cycle through relations so every relation is present.
    const std::size_t rel = b < config.n_relations ? b : rng.index(config.n_relations);
    std::pair<std::size_t, std::size_t> pair;
    do {
      pair = {rng.index(entities.size()), rng.index(entities.size())};
    } while (pair.first == pair.second || used_pairs.count(pair) != 0);
    used_pairs.insert(pair);
    const Split split = rng.uniform() < config.test_fraction ? Split::kTest : Split::kTrain;

    for (std::size_t s = 0; s < config.sentences_per_bag; ++s) {
      const bool noise = rng.bernoulli(config.noise_ratio);
      const Phrase* phrase = nullptr;
      if (!noise) {
        phrase = &phrases[rel][rng.index(config.mentions_per_relation)];
      } else if (rng.bernoulli(config.other_phrase_share) && config.n_relations > 1) {
        std::size_t other = rng.index(config.n_relations - 1);
        if (other >= rel) ++other;
        phrase = &phrases[other][rng.index(config.mentions_per_relation)];
      }

      // Layout: [pre] head [gap] middle [gap] tail [post]; optional slots are
      // dropped from the outside in until the sentence fits the cap.
      std::size_t middle = phrase ? phrase->words.size() : 1 + rng.index(3);
      std::size_t pre = rng.index(2), gap1 = rng.index(2), gap2 = rng.index(2), post = rng.index(2);
      if (!phrase) {
        gap1 = gap2 = 0;
      }
      for (std::size_t* slot : {&post, &pre, &gap2, &gap1}) {
        if (pre + gap1 + gap2 + post + middle + 2 > cap) *slot = 0;
      }

      Record r;
      r.relation = relation_names[rel];
      r.split = split;
      for (std::size_t i = 0; i < pre; ++i) r.tokens.push_back(filler());
      r.head = static_cast<int>(r.tokens.size());
      r.tokens.push_back(entities[pair.first]);
      for (std::size_t i = 0; i < gap1; ++i) r.tokens.push_back(filler());
      const int phrase_start = static_cast<int>(r.tokens.size());
      if (phrase) {
        r.tokens.insert(r.tokens.end(), phrase->words.begin(), phrase->words.end());
      } else {
        for (std::size_t i = 0; i < middle; ++i) r.tokens.push_back(filler());
      }
      for (std::size_t i = 0; i < gap2; ++i) r.tokens.push_back(filler());
      r.tail = static_cast<int>(r.tokens.size());
      r.tokens.push_back(entities[pair.second]);
      for (std::size_t i = 0; i < post; ++i) r.tokens.push_back(filler());

      std::vector<IndexSet> gold;
      if (!noise) {
        const int len = static_cast<int>(phrase->words.size());
        const int key = phrase_start + static_cast<int>(phrase->key);
        IndexSet full;
        for (int k = 0; k < len; ++k) full.push_back(phrase_start + k);
        gold.push_back(full);
        for (int a = phrase_start; a <= key; ++a) {
          for (int e = key; e < phrase_start + len; ++e) {
            if (a == phrase_start && e == phrase_start + len - 1) continue;
            IndexSet sub;
            for (int k = a; k <= e; ++k) sub.push_back(k);
            gold.push_back(sub);
          }
        }
      }
      r.gold_mentions = std::move(gold);
      r.is_noise = noise;
      records.push_back(std::move(r));
    }
  }
  Corpus corpus = assemble_corpus(records);
  return corpus;
}

std::vector<std::vector<std::string>> gold_lexicons(const Corpus& corpus) {
  std::vector<std::set<std::string>> sets(corpus.num_relations());
  for (const auto& bag : corpus.bags) {
    for (const auto& s : bag.sentences) {
      if (s.is_noise.value_or(false) || !s.gold_mentions) continue;
      for (const auto& g : *s.gold_mentions) {
        if (!g.empty()) sets[s.relation_id].insert(normalize_surface(s, g));
      }
    }
  }
  std::vector<std::vector<std::string>> out;
  for (auto& s : sets) out.emplace_back(s.begin(), s.end());
  return out;
}

}  // namespace hrlme
