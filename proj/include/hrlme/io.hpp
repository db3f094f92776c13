#ifndef HRLME_IO_HPP
#define HRLME_IO_HPP

#include "hrlme/corpus.hpp"
#include "hrlme/evaluation.hpp"
#include "hrlme/extractor.hpp"
#include "hrlme/ranking.hpp"
#include "hrlme/trainer.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hrlme {

/// One line per mention: {"bag","sentence","relation","indices","surface","reward"}.
void write_extractions(std::ostream& out, std::span<const MentionResult> extractions, const Corpus& corpus);
std::vector<MentionResult> read_extractions(std::istream& in);

/// One line per bag: {"bag","options","final_reward"}.
void write_traces(std::ostream& out, std::span<const SelectionTrace> traces);
std::vector<SelectionTrace> read_traces(std::istream& in);

/// Header: episode,mean_final_reward_h,mean_reward_l,selection_rate_positive,selection_rate_noise.
void write_metrics_csv(std::ostream& out, const TrainLog& log);

/// {relation name: [{"mention","score","count"}]}.
void write_lexicon(std::ostream& out, const Lexicon& lexicon, const std::vector<std::string>& relations);
/// Relations absent from the file get empty lists; unknown names are an error.
Lexicon read_lexicon(std::istream& in, const std::vector<std::string>& relations);

struct EvalReport {
  AccuracyReport accuracy;
  std::map<std::size_t, double> precision_at_k;
  SelectorReport selector;
  double downstream_macro_f1 = 0.0;
};

void write_report(std::ostream& out, const EvalReport& report);

/// One line per row: {"split","label","features"}.
void write_features(std::ostream& out, const FeatureSet& features, Split split);
/// Rows of the requested split only.
FeatureSet read_features(std::istream& in, Split split);

}  // namespace hrlme

#endif  // HRLME_IO_HPP
