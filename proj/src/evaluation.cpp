#include "hrlme/evaluation.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace hrlme {

AccuracyReport sentence_accuracy(std::span<const MentionResult> extractions, const Corpus& corpus) {
  AccuracyReport report;
  for (const auto& m : extractions) {
    if (m.indices.empty()) {
      continue;
    }
    ++report.extracted;
    const Sentence& s = corpus.bags.at(m.ref.bag).sentences.at(m.ref.sentence);
    if (s.is_noise.value_or(false)) {
      continue;
    }
    if (!s.gold_mentions) {
      throw std::invalid_argument("sentence_accuracy: sentence " + std::to_string(m.ref.sentence) + " of bag " +
                                  std::to_string(m.ref.bag) + " has no gold mentions");
    }
    const auto& gold = *s.gold_mentions;
    if (std::find(gold.begin(), gold.end(), m.indices) != gold.end()) {
      ++report.correct;
    }
  }
  report.undefined = report.extracted == 0;
  report.accuracy =
      report.undefined ? 0.0 : static_cast<double>(report.correct) / static_cast<double>(report.extracted);
  return report;
}

double precision_at_k(const Lexicon& lexicon, const std::vector<std::vector<std::string>>& gold, std::size_t k) {
  if (k == 0) {
    throw std::invalid_argument("precision_at_k: K must be at least 1");
  }
  if (gold.empty()) {
    return 0.0;
  }
  double total = 0.0;
  for (std::size_t r = 0; r < gold.size(); ++r) {
    if (r >= lexicon.size() || lexicon[r].empty()) {
      continue;
    }
    const std::unordered_set<std::string> members(gold[r].begin(), gold[r].end());
    const std::size_t top = std::min(k, lexicon[r].size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < top; ++i) {
      hits += members.count(lexicon[r][i].mention);
    }
    total += static_cast<double>(hits) / static_cast<double>(top);
  }
  return total / static_cast<double>(gold.size());
}

SelectorReport selector_metrics(std::span<const SelectionTrace> traces, const Corpus& corpus) {
  SelectorReport report;
  for (const auto& trace : traces) {
    const Bag& bag = corpus.bags.at(trace.bag);
    if (trace.options.size() != bag.sentences.size()) {
      throw std::invalid_argument("selector_metrics: trace for bag " + std::to_string(trace.bag) +
                                  " does not match its sentence count");
    }
    for (std::size_t s = 0; s < bag.sentences.size(); ++s) {
      const bool positive = !bag.sentences[s].is_noise.value_or(false);
      const bool chosen = trace.options[s];
      report.positives += positive ? 1 : 0;
      report.selected += chosen ? 1 : 0;
      report.true_positive += positive && chosen ? 1 : 0;
    }
  }
  const auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  report.precision = ratio(report.true_positive, report.selected);
  report.recall = ratio(report.true_positive, report.positives);
  return report;
}

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  for (std::string w; in >> w;) {
    words.push_back(std::move(w));
  }
  return words;
}

bool contains_run(const std::vector<std::string>& tokens, const std::vector<std::string>& run) {
  if (run.empty() || run.size() > tokens.size()) {
    return false;
  }
  return std::search(tokens.begin(), tokens.end(), run.begin(), run.end()) != tokens.end();
}

}  // namespace

nn::Vector mention_feature_vector(const Sentence& sentence, const Lexicon& lexicon) {
  std::vector<std::string> tokens;
  tokens.reserve(sentence.tokens.size());
  for (const auto& t : sentence.tokens) {
    tokens.push_back(fold_case(t));
  }
  nn::Vector bits = nn::Vector::Zero(static_cast<Eigen::Index>(lexicon.size()));
  for (std::size_t r = 0; r < lexicon.size(); ++r) {
    for (const auto& entry : lexicon[r]) {
      if (contains_run(tokens, split_words(entry.mention))) {
        bits(static_cast<Eigen::Index>(r)) = 1.0;
        break;
      }
    }
  }
  return bits;
}

FeatureSet build_features(const Corpus& corpus, const Lexicon& lexicon, Split split) {
  std::vector<const Sentence*> rows;
  for (const auto& bag : corpus.bags) {
    if (bag.split != split) continue;
    for (const auto& s : bag.sentences) rows.push_back(&s);
  }
  FeatureSet out;
  out.features = nn::Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(lexicon.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = mention_feature_vector(*rows[i], lexicon).transpose();
    out.labels.push_back(rows[i]->relation_id);
  }
  return out;
}

double macro_f1(std::span<const std::size_t> predicted, std::span<const std::size_t> gold) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("macro_f1: prediction and gold sizes differ");
  }
  std::set<std::size_t> classes(gold.begin(), gold.end());
  classes.insert(predicted.begin(), predicted.end());
  if (classes.empty()) {
    return 0.0;
  }
  double total = 0.0;
  for (std::size_t c : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool p = predicted[i] == c;
      const bool g = gold[i] == c;
      tp += p && g ? 1 : 0;
      fp += p && !g ? 1 : 0;
      fn += !p && g ? 1 : 0;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    total += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return total / static_cast<double>(classes.size());
}

double logreg_classify(const FeatureSet& train, const FeatureSet& test, std::size_t n_classes,
                       const LogRegOptions& options) {
  if (static_cast<std::size_t>(train.features.rows()) != train.labels.size() ||
      static_cast<std::size_t>(test.features.rows()) != test.labels.size()) {
    throw std::invalid_argument("logreg_classify: feature rows and labels differ in count");
  }
  if (train.features.cols() != test.features.cols()) {
    throw std::invalid_argument("logreg_classify: train and test feature widths differ");
  }
  const std::set<std::size_t> present(train.labels.begin(), train.labels.end());
  if (present.size() < 2) {
    throw std::invalid_argument("logreg_classify: training set needs at least two classes");
  }
  for (std::size_t y : train.labels) {
    if (y >= n_classes) throw std::out_of_range("logreg_classify: label out of range");
  }

  const auto k = static_cast<Eigen::Index>(n_classes);
  const Eigen::Index d = train.features.cols();
  nn::ParamSet params;
  const std::size_t w = params.add("logreg.w", nn::Matrix::Zero(k, d));
  const std::size_t b = params.add("logreg.b", nn::Matrix::Zero(k, 1));

  std::vector<std::size_t> order(train.labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  nn::Rng rng(options.seed);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      const auto row = static_cast<Eigen::Index>(i);
      const nn::Vector x = train.features.row(row).transpose();
      nn::Vector delta = nn::softmax(params.value(w) * x + params.value(b).col(0));
      delta(static_cast<Eigen::Index>(train.labels[i])) -= 1.0;
      params.grad(w).noalias() += delta * x.transpose();
      params.grad(b).col(0) += delta;
      nn::sgd_step(params, options.lr);
    }
  }

  std::vector<std::size_t> predicted;
  predicted.reserve(test.labels.size());
  for (Eigen::Index i = 0; i < test.features.rows(); ++i) {
    const nn::Vector logits = params.value(w) * test.features.row(i).transpose() + params.value(b).col(0);
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    predicted.push_back(static_cast<std::size_t>(best));
  }
  return macro_f1(predicted, test.labels);
}

}  // namespace hrlme
