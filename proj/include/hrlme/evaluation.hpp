#ifndef HRLME_EVALUATION_HPP
#define HRLME_EVALUATION_HPP

#include "hrlme/corpus.hpp"
#include "hrlme/extractor.hpp"
#include "hrlme/ranking.hpp"
#include "hrlme/trainer.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hrlme {

struct AccuracyReport {
  double accuracy = 0.0;
  std::size_t correct = 0;
  /// Sentences with a non-empty extraction; the denominator.
  std::size_t extracted = 0;
  /// Set when nothing was extracted; accuracy is then reported as 0.
  bool undefined = false;
};

/// Correct iff the sentence is not noise and the indices equal one of its gold
/// mentions. Throws when a non-noise sentence with an extraction has no gold.
AccuracyReport sentence_accuracy(std::span<const MentionResult> extractions, const Corpus& corpus);

/// Mean over relations of the gold share among the top min(k, size) lexicon
/// entries. gold[r] is relation r's gold surface list; a relation with an
/// empty lexicon contributes 0.
double precision_at_k(const Lexicon& lexicon, const std::vector<std::vector<std::string>>& gold, std::size_t k);

struct SelectorReport {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t true_positive = 0;
  std::size_t selected = 0;
  std::size_t positives = 0;
};

/// "Selected" predicts "not noise". Sentences without a noise flag count as positives.
SelectorReport selector_metrics(std::span<const SelectionTrace> traces, const Corpus& corpus);

/// Bit r is set iff some lexicon mention of relation r occurs contiguously in the sentence.
nn::Vector mention_feature_vector(const Sentence& sentence, const Lexicon& lexicon);

struct FeatureSet {
  nn::Matrix features;
  std::vector<std::size_t> labels;
};

/// One row per sentence of the split, labeled with its relation.
FeatureSet build_features(const Corpus& corpus, const Lexicon& lexicon, Split split);

/// Macro-averaged F1 over classes present in gold or predictions; 0/0 counts as 0.
double macro_f1(std::span<const std::size_t> predicted, std::span<const std::size_t> gold);

struct LogRegOptions {
  double lr = 0.1;
  std::size_t epochs = 50;
  std::uint64_t seed = 1;
};

/// Softmax regression trained by per-example SGD on cross-entropy, scored by macro-F1 on test.
double logreg_classify(const FeatureSet& train, const FeatureSet& test, std::size_t n_classes,
                       const LogRegOptions& options);

}  // namespace hrlme

#endif  // HRLME_EVALUATION_HPP
