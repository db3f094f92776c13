#include "hrlme/io.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <stdexcept>

namespace hrlme {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      fn(json::parse(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(number) + ": " + e.what());
    }
  }
}

}  // namespace

void write_extractions(std::ostream& out, std::span<const MentionResult> extractions, const Corpus& corpus) {
  for (const auto& m : extractions) {
    const Sentence& s = corpus.bags.at(m.ref.bag).sentences.at(m.ref.sentence);
    json j;
    j["bag"] = m.ref.bag;
    j["sentence"] = m.ref.sentence;
    j["relation"] = corpus.relations.at(s.relation_id);
    j["indices"] = m.indices;
    j["surface"] = m.surface;
    j["reward"] = m.reward;
    out << j.dump() << '\n';
  }
}

std::vector<MentionResult> read_extractions(std::istream& in) {
  std::vector<MentionResult> out;
  for_each_json_line(in, [&out](const json& j) {
    MentionResult m;
    m.ref.bag = j.at("bag").get<std::size_t>();
    m.ref.sentence = j.at("sentence").get<std::size_t>();
    m.indices = j.at("indices").get<IndexSet>();
    m.surface = j.at("surface").get<std::string>();
    m.reward = j.at("reward").get<double>();
    out.push_back(std::move(m));
  });
  return out;
}

void write_traces(std::ostream& out, std::span<const SelectionTrace> traces) {
  for (const auto& t : traces) {
    json j;
    j["bag"] = t.bag;
    j["options"] = t.options;
    j["final_reward"] = t.final_reward;
    out << j.dump() << '\n';
  }
}

std::vector<SelectionTrace> read_traces(std::istream& in) {
  std::vector<SelectionTrace> out;
  for_each_json_line(in, [&out](const json& j) {
    SelectionTrace t;
    t.bag = j.at("bag").get<std::size_t>();
    t.options = j.at("options").get<std::vector<bool>>();
    t.final_reward = j.at("final_reward").get<double>();
    out.push_back(std::move(t));
  });
  return out;
}

void write_metrics_csv(std::ostream& out, const TrainLog& log) {
  out << "episode,mean_final_reward_h,mean_reward_l,selection_rate_positive,selection_rate_noise\n";
  for (const auto& m : log.episodes) {
    // json number formatting round-trips and is locale-independent.
    out << m.episode << ',' << json(m.mean_final_reward_h).dump() << ',' << json(m.mean_reward_l).dump() << ','
        << json(m.selection_rate_positive).dump() << ',' << json(m.selection_rate_noise).dump() << '\n';
  }
}

void write_lexicon(std::ostream& out, const Lexicon& lexicon, const std::vector<std::string>& relations) {
  json j = json::object();
  for (std::size_t r = 0; r < relations.size(); ++r) {
    json list = json::array();
    if (r < lexicon.size()) {
      for (const auto& e : lexicon[r]) {
        list.push_back({{"mention", e.mention}, {"score", e.score}, {"count", e.count}});
      }
    }
    j[relations[r]] = std::move(list);
  }
  out << j.dump(2) << '\n';
}

Lexicon read_lexicon(std::istream& in, const std::vector<std::string>& relations) {
  const json j = json::parse(in);
  Lexicon lexicon(relations.size());
  for (const auto& [name, list] : j.items()) {
    std::size_t r = 0;
    while (r < relations.size() && relations[r] != name) ++r;
    if (r == relations.size()) {
      throw std::invalid_argument("lexicon names unknown relation '" + name + "'");
    }
    for (const auto& e : list) {
      lexicon[r].push_back(
          {e.at("mention").get<std::string>(), e.at("score").get<double>(), e.at("count").get<std::size_t>()});
    }
  }
  return lexicon;
}

void write_report(std::ostream& out, const EvalReport& report) {
  json p = json::object();
  for (const auto& [k, v] : report.precision_at_k) {
    p[std::to_string(k)] = v;
  }
  json j;
  j["sentence_accuracy"] = report.accuracy.accuracy;
  j["sentence_accuracy_detail"] = {{"correct", report.accuracy.correct},
                                   {"extracted", report.accuracy.extracted},
                                   {"denominator", "sentences with a non-empty extraction"},
                                   {"undefined", report.accuracy.undefined}};
  j["precision_at_k"] = std::move(p);
  j["selector_precision"] = report.selector.precision;
  j["selector_recall"] = report.selector.recall;
  j["downstream_macro_f1"] = report.downstream_macro_f1;
  out << j.dump(2) << '\n';
}

void write_features(std::ostream& out, const FeatureSet& features, Split split) {
  for (Eigen::Index i = 0; i < features.features.rows(); ++i) {
    std::vector<int> bits;
    for (Eigen::Index c = 0; c < features.features.cols(); ++c) {
      bits.push_back(features.features(i, c) != 0.0 ? 1 : 0);
    }
    json j;
    j["split"] = split_name(split);
    j["label"] = features.labels[static_cast<std::size_t>(i)];
    j["features"] = bits;
    out << j.dump() << '\n';
  }
}

FeatureSet read_features(std::istream& in, Split split) {
  std::vector<std::vector<int>> rows;
  FeatureSet out;
  for_each_json_line(in, [&](const json& j) {
    if (parse_split(j.at("split").get<std::string>()) != split) return;
    rows.push_back(j.at("features").get<std::vector<int>>());
    out.labels.push_back(j.at("label").get<std::size_t>());
  });
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  out.features = nn::Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw std::invalid_argument("feature rows differ in width");
    }
    for (std::size_t c = 0; c < width; ++c) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return out;
}

}  // namespace hrlme
