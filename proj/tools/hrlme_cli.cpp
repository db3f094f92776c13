// hrlme: command-line pipeline for relation mention extraction.
//
//   gen-corpus -> pretrain-cnn -> pretrain-extractor -> train -> extract -> rank -> eval
//
// Every command takes --seed and --out. Usage errors exit 2, runtime errors exit 1.

#include "hrlme/baselines.hpp"
#include "hrlme/checkpoint.hpp"
#include "hrlme/corpus.hpp"
#include "hrlme/estimator.hpp"
#include "hrlme/evaluation.hpp"
#include "hrlme/extractor.hpp"
#include "hrlme/io.hpp"
#include "hrlme/ranking.hpp"
#include "hrlme/selector.hpp"
#include "hrlme/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace hrlme;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::string preset = "noisy";
  std::optional<double> lambda1;
  std::optional<double> lambda2;

  RewardWeights weights() const {
    RewardWeights w = preset_weights(preset);
    if (lambda1) w.lambda1 = *lambda1;
    if (lambda2) w.lambda2 = *lambda2;
    return w;
  }
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", c.out, out_help)->required();
  cmd->add_option("--preset", c.preset, "Hyperparameter preset: noisy (lambda1=0.4, lambda2=0.02) or clean (1, 0.05)")
      ->check(CLI::IsMember({"noisy", "clean"}))
      ->capture_default_str();
  cmd->add_option("--lambda1", c.lambda1, "Continuity weight; overrides the preset");
  cmd->add_option("--lambda2", c.lambda2, "Entity-distance weight; overrides the preset");
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path());
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  return in;
}

CnnEstimator load_estimator(const std::string& path, const Corpus& corpus) {
  CnnEstimator est = CnnEstimator::from_checkpoint(load_checkpoint(path));
  if (est.num_relations() != corpus.num_relations()) {
    throw std::runtime_error("estimator has " + std::to_string(est.num_relations()) + " relations but the corpus has " +
                             std::to_string(corpus.num_relations()));
  }
  if (static_cast<std::size_t>(est.params().value(0).rows()) != corpus.vocabulary.size()) {
    throw std::runtime_error("estimator vocabulary does not match the corpus vocabulary");
  }
  return est;
}

struct Policies {
  SelectorPolicy selector;
  ExtractorPolicy extractor;
};

Policies fresh_policies(const CnnEstimator& est) {
  return {SelectorPolicy::for_estimator(est), ExtractorPolicy::for_estimator(est)};
}

Policies load_policies(const std::string& path, const CnnEstimator& est) {
  Policies p = fresh_policies(est);
  const Checkpoint ckpt = load_checkpoint(path);
  p.selector.import_from(ckpt);
  p.extractor.import_from(ckpt);
  return p;
}

void save_policies(const std::string& path, const Policies& p) {
  Checkpoint ckpt;
  p.selector.export_to(ckpt);
  p.extractor.export_to(ckpt);
  open_out(path) << encode_checkpoint(ckpt);
}

std::optional<Split> parse_split_option(const std::string& name) {
  if (name == "all") return std::nullopt;
  return parse_split(name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical RL relation mention extraction"};
  app.require_subcommand(1);
  std::function<void()> run;

  // gen-corpus
  Common gen;
  SyntheticConfig syn;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "Write a synthetic JSONL corpus with planted mentions");
  add_common(gen_cmd, gen, "Corpus JSONL path");
  gen_cmd->add_option("--relations", syn.n_relations, "Number of relations")->capture_default_str();
  gen_cmd->add_option("--mentions-per-relation", syn.mentions_per_relation, "Planted phrases per relation")
      ->capture_default_str();
  gen_cmd->add_option("--bags", syn.bags, "Number of bags")->capture_default_str();
  gen_cmd->add_option("--sentences-per-bag", syn.sentences_per_bag, "Sentences per bag")->capture_default_str();
  gen_cmd->add_option("--noise-ratio", syn.noise_ratio, "Share of noise sentences")->capture_default_str();
  gen_cmd->add_option("--other-phrase-share", syn.other_phrase_share,
                      "Share of noise sentences carrying another relation's phrase")
      ->capture_default_str();
  gen_cmd->add_option("--test-fraction", syn.test_fraction, "Share of bags in the test split")->capture_default_str();
  gen_cmd->add_option("--max-length", syn.max_sentence_length, "Maximum sentence length")->capture_default_str();
  gen_cmd->add_option("--entity-pool", syn.entity_pool, "Distinct entity names")->capture_default_str();
  gen_cmd->add_option("--filler-pool", syn.filler_pool, "Distinct filler words")->capture_default_str();
  gen_cmd->callback([&] {
    run = [&] {
      syn.seed = gen.seed;
      const Corpus corpus = generate_synthetic(syn);
      auto out = open_out(gen.out);
      write_jsonl(corpus, out);
    };
  });

  // pretrain-cnn
  Common cnn;
  std::string cnn_corpus;
  EstimatorTrainOptions cnn_opts;
  EstimatorConfig cnn_cfg;
  auto* cnn_cmd = app.add_subcommand("pretrain-cnn", "Train the CNN reward estimator on corpus labels");
  add_common(cnn_cmd, cnn, "Estimator checkpoint path");
  cnn_cmd->add_option("--corpus", cnn_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  cnn_cmd->add_option("--lr", cnn_opts.lr, "Learning rate")->capture_default_str();
  cnn_cmd->add_option("--batch", cnn_opts.batch, "Batch size")->capture_default_str();
  cnn_cmd->add_option("--epochs", cnn_opts.epochs, "Epochs")->capture_default_str();
  cnn_cmd->add_option("--dropout", cnn_opts.dropout, "Dropout rate on the sentence representation")
      ->capture_default_str();
  cnn_cmd->add_option("--word-dim", cnn_cfg.word_dim, "Word embedding size")->capture_default_str();
  cnn_cmd->add_option("--pos-dim", cnn_cfg.pos_dim, "Position embedding size")->capture_default_str();
  cnn_cmd->add_option("--feature-maps", cnn_cfg.feature_maps, "Convolution feature maps")->capture_default_str();
  cnn_cmd->callback([&] {
    run = [&] {
      const Corpus corpus = load_jsonl(cnn_corpus);
      cnn_cfg.vocab_size = corpus.vocabulary.size();
      cnn_cfg.n_relations = corpus.num_relations();
      CnnEstimator est(cnn_cfg, cnn.seed);
      cnn_opts.seed = cnn.seed;
      const EstimatorTrainLog log = train_estimator(est, corpus, cnn_opts);
      for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) {
        std::cout << "epoch " << e << " loss " << log.epoch_loss[e] << '\n';
      }
      Checkpoint ckpt;
      est.export_to(ckpt);
      open_out(cnn.out) << encode_checkpoint(ckpt);
    };
  });

  // pretrain-extractor
  Common pre;
  std::string pre_corpus, pre_cnn;
  PretrainOptions pre_opts;
  auto* pre_cmd = app.add_subcommand("pretrain-extractor", "Pretrain the mention extractor on every training sentence");
  add_common(pre_cmd, pre, "Policy checkpoint path (selector and extractor)");
  pre_cmd->add_option("--corpus", pre_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  pre_cmd->add_option("--cnn", pre_cnn, "Estimator checkpoint")->required()->check(CLI::ExistingFile);
  pre_cmd->add_option("--lr", pre_opts.lr, "Learning rate")->capture_default_str();
  pre_cmd->add_option("--epochs", pre_opts.epochs, "Epochs")->capture_default_str();
  pre_cmd->add_option("--samples", pre_opts.samples_per_sentence, "Sampled mentions per sentence")
      ->capture_default_str();
  pre_cmd->add_flag("--baseline", pre_opts.sample_mean_baseline,
                    "Subtract the mean reward of each sentence's own samples");
  pre_cmd->callback([&] {
    run = [&] {
      const Corpus corpus = load_jsonl(pre_corpus);
      const CnnEstimator est = load_estimator(pre_cnn, corpus);
      pre_opts.weights = pre.weights();
      pre_opts.seed = pre.seed;
      const MentionScorer scorer(est, pre_opts.weights);
      Policies p = fresh_policies(est);
      const PretrainLog log = pretrain_extractor(corpus, p.extractor, est, scorer, pre_opts);
      for (std::size_t e = 0; e < log.epoch_reward.size(); ++e) {
        std::cout << "epoch " << e << " mean reward " << log.epoch_reward[e] << '\n';
      }
      save_policies(pre.out, p);
    };
  });

  // train
  Common tr;
  std::string tr_corpus, tr_cnn, tr_policies, tr_mode = "hrl", tr_metrics;
  TrainConfig tr_cfg;
  auto* tr_cmd = app.add_subcommand("train", "Joint hierarchical training (or extractor-only with --mode single)");
  add_common(tr_cmd, tr, "Trained policy checkpoint path");
  tr_cmd->add_option("--corpus", tr_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  tr_cmd->add_option("--cnn", tr_cnn, "Estimator checkpoint")->required()->check(CLI::ExistingFile);
  tr_cmd->add_option("--policies", tr_policies, "Pretrained policy checkpoint")->required()->check(CLI::ExistingFile);
  tr_cmd->add_option("--mode", tr_mode, "hrl or single")->check(CLI::IsMember({"hrl", "single"}))->capture_default_str();
  tr_cmd->add_option("--lr", tr_cfg.lr_hrl, "Learning rate for both policies")->capture_default_str();
  tr_cmd->add_option("--epochs", tr_cfg.episodes, "Passes over the training bags")->capture_default_str();
  tr_cmd->add_option("--gamma", tr_cfg.gamma, "Discount factor")->capture_default_str()->check(
      CLI::Range(std::numeric_limits<double>::min(), 1.0));
  tr_cmd->add_option("--trajectories", tr_cfg.trajectories_per_bag, "Sampled trajectories per bag")
      ->capture_default_str();
  tr_cmd->add_flag("--baseline", tr_cfg.use_baseline, "Subtract a moving-average baseline from returns");
  tr_cmd->add_option("--metrics", tr_metrics, "Per-episode metric CSV path");
  tr_cmd->callback([&] {
    run = [&] {
      const Corpus corpus = load_jsonl(tr_corpus);
      const CnnEstimator est = load_estimator(tr_cnn, corpus);
      Policies p = load_policies(tr_policies, est);
      tr_cfg.mode = parse_mode(tr_mode);
      tr_cfg.weights = tr.weights();
      tr_cfg.seed = tr.seed;
      const MentionScorer scorer(est, tr_cfg.weights);
      const FeatureBank features(est);
      const TrainLog log = train_hrl(corpus, p.selector, p.extractor, features, scorer, tr_cfg);
      save_policies(tr.out, p);
      if (!tr_metrics.empty()) {
        auto out = open_out(tr_metrics);
        write_metrics_csv(out, log);
      }
    };
  });

  // extract
  Common ex;
  std::string ex_corpus, ex_cnn, ex_policies, ex_mode = "hrl", ex_split = "test", ex_traces;
  auto* ex_cmd = app.add_subcommand("extract", "Greedy sentence selection and mention extraction");
  add_common(ex_cmd, ex, "Extraction JSONL path");
  ex_cmd->add_option("--corpus", ex_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  ex_cmd->add_option("--cnn", ex_cnn, "Estimator checkpoint")->required()->check(CLI::ExistingFile);
  ex_cmd->add_option("--policies", ex_policies, "Policy checkpoint")->required()->check(CLI::ExistingFile);
  ex_cmd->add_option("--mode", ex_mode, "hrl or single (select every sentence)")
      ->check(CLI::IsMember({"hrl", "single"}))
      ->capture_default_str();
  ex_cmd->add_option("--split", ex_split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  ex_cmd->add_option("--traces", ex_traces, "Selection trace JSONL path");
  ex_cmd->callback([&] {
    run = [&] {
      const Corpus corpus = load_jsonl(ex_corpus);
      const CnnEstimator est = load_estimator(ex_cnn, corpus);
      const Policies p = load_policies(ex_policies, est);
      const MentionScorer scorer(est, ex.weights());
      const FeatureBank features(est);
      const Inference inf = extract_greedy(corpus, p.selector, p.extractor, features, scorer, parse_mode(ex_mode),
                                           parse_split_option(ex_split));
      auto out = open_out(ex.out);
      write_extractions(out, inf.extractions, corpus);
      if (!ex_traces.empty()) {
        auto traces = open_out(ex_traces);
        write_traces(traces, inf.traces);
      }
    };
  });

  // rank
  Common rk;
  std::string rk_corpus, rk_extractions;
  std::size_t rk_top = 10;
  auto* rk_cmd = app.add_subcommand("rank", "Rank extracted mentions per relation and keep the top N");
  add_common(rk_cmd, rk, "Lexicon JSON path");
  rk_cmd->add_option("--corpus", rk_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  rk_cmd->add_option("--extractions", rk_extractions, "Extraction JSONL")->required()->check(CLI::ExistingFile);
  rk_cmd->add_option("--top", rk_top, "Mentions kept per relation")->capture_default_str()->check(
      CLI::PositiveNumber);
  rk_cmd->callback([&] {
    run = [&] {
      const Corpus corpus = load_jsonl(rk_corpus);
      auto in = open_in(rk_extractions);
      const auto extractions = read_extractions(in);
      const Lexicon lexicon = top_n(accumulate(extractions, corpus), rk_top);
      auto out = open_out(rk.out);
      write_lexicon(out, lexicon, corpus.relations);
    };
  });

  // baseline-ngram and baseline-random
  Common bl;
  std::string bl_corpus, bl_cnn, bl_split = "test";
  bool bl_random = false;
  auto* bl_cmd = app.add_subcommand("baseline-ngram", "Best-reward n-gram (n <= 3) per sentence");
  add_common(bl_cmd, bl, "Extraction JSONL path");
  bl_cmd->add_option("--corpus", bl_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  bl_cmd->add_option("--cnn", bl_cnn, "Estimator checkpoint")->required()->check(CLI::ExistingFile);
  bl_cmd->add_option("--split", bl_split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  bl_cmd->add_flag("--random", bl_random, "Draw a uniform random n-gram instead of the best one");
  bl_cmd->callback([&] {
    run = [&] {
      const Corpus corpus = load_jsonl(bl_corpus);
      const CnnEstimator est = load_estimator(bl_cnn, corpus);
      const MentionScorer scorer(est, bl.weights());
      const std::optional<Split> split = parse_split_option(bl_split);
      nn::Rng rng(bl.seed);
      std::vector<MentionResult> extractions;
      for (std::size_t b = 0; b < corpus.bags.size(); ++b) {
        if (split && corpus.bags[b].split != *split) continue;
        for (std::size_t s = 0; s < corpus.bags[b].sentences.size(); ++s) {
          const Sentence& sentence = corpus.bags[b].sentences[s];
          extractions.push_back(bl_random ? random_span_extract(sentence, scorer, rng, {b, s})
                                          : ngram_extract(sentence, scorer, {b, s}));
        }
      }
      auto out = open_out(bl.out);
      write_extractions(out, extractions, corpus);
    };
  });

  // eval
  Common ev;
  std::string ev_corpus, ev_extractions, ev_lexicon, ev_traces;
  LogRegOptions ev_logreg;
  auto* ev_cmd = app.add_subcommand("eval", "Sentence accuracy, Precision@K, selector metrics and downstream F1");
  add_common(ev_cmd, ev, "Report JSON path");
  ev_cmd->add_option("--corpus", ev_corpus, "Corpus JSONL with gold mentions")->required()->check(CLI::ExistingFile);
  ev_cmd->add_option("--extractions", ev_extractions, "Extraction JSONL")->required()->check(CLI::ExistingFile);
  ev_cmd->add_option("--lexicon", ev_lexicon, "Lexicon JSON for Precision@K and downstream F1")
      ->check(CLI::ExistingFile);
  ev_cmd->add_option("--traces", ev_traces, "Selection trace JSONL for selector metrics")->check(CLI::ExistingFile);
  ev_cmd->add_option("--lr", ev_logreg.lr, "Logistic regression learning rate")->capture_default_str();
  ev_cmd->add_option("--epochs", ev_logreg.epochs, "Logistic regression epochs")->capture_default_str();
  ev_cmd->callback([&] {
    run = [&] {
      const Corpus corpus = load_jsonl(ev_corpus);
      auto in = open_in(ev_extractions);
      const auto extractions = read_extractions(in);
      EvalReport report;
      report.accuracy = sentence_accuracy(extractions, corpus);
      if (report.accuracy.undefined) {
        std::cerr << "warning: no non-empty extractions; sentence accuracy reported as 0\n";
      }
      for (std::size_t k : {1, 2, 5, 10}) report.precision_at_k[k] = 0.0;
      if (!ev_lexicon.empty()) {
        auto lin = open_in(ev_lexicon);
        const Lexicon lexicon = read_lexicon(lin, corpus.relations);
        const auto gold = gold_lexicons(corpus);
        for (auto& [k, v] : report.precision_at_k) v = precision_at_k(lexicon, gold, k);
        ev_logreg.seed = ev.seed;
        report.downstream_macro_f1 =
            logreg_classify(build_features(corpus, lexicon, Split::kTrain), build_features(corpus, lexicon, Split::kTest),
                            corpus.num_relations(), ev_logreg);
      }
      if (!ev_traces.empty()) {
        auto tin = open_in(ev_traces);
        report.selector = selector_metrics(read_traces(tin), corpus);
      }
      auto out = open_out(ev.out);
      write_report(out, report);
    };
  });

  // features
  Common ft;
  std::string ft_corpus, ft_lexicon;
  auto* ft_cmd = app.add_subcommand("features", "Binary mention-lexicon features for every sentence");
  add_common(ft_cmd, ft, "Feature JSONL path");
  ft_cmd->add_option("--corpus", ft_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  ft_cmd->add_option("--lexicon", ft_lexicon, "Lexicon JSON")->required()->check(CLI::ExistingFile);
  ft_cmd->callback([&] {
    run = [&] {
      const Corpus corpus = load_jsonl(ft_corpus);
      auto lin = open_in(ft_lexicon);
      const Lexicon lexicon = read_lexicon(lin, corpus.relations);
      auto out = open_out(ft.out);
      write_features(out, build_features(corpus, lexicon, Split::kTrain), Split::kTrain);
      write_features(out, build_features(corpus, lexicon, Split::kTest), Split::kTest);
    };
  });

  // classify
  Common cl;
  std::string cl_features;
  std::size_t cl_classes = 0;
  LogRegOptions cl_logreg;
  auto* cl_cmd = app.add_subcommand("classify", "Logistic regression on feature JSONL; reports test macro-F1");
  add_common(cl_cmd, cl, "Result JSON path");
  cl_cmd->add_option("--features", cl_features, "Feature JSONL")->required()->check(CLI::ExistingFile);
  cl_cmd->add_option("--classes", cl_classes, "Number of classes (default: one more than the largest label)");
  cl_cmd->add_option("--lr", cl_logreg.lr, "Learning rate")->capture_default_str();
  cl_cmd->add_option("--epochs", cl_logreg.epochs, "Epochs")->capture_default_str();
  cl_cmd->callback([&] {
    run = [&] {
      auto in = open_in(cl_features);
      const FeatureSet train = read_features(in, Split::kTrain);
      in.clear();
      in.seekg(0);
      const FeatureSet test = read_features(in, Split::kTest);
      std::size_t classes = cl_classes;
      if (classes == 0) {
        for (std::size_t y : train.labels) classes = std::max(classes, y + 1);
        for (std::size_t y : test.labels) classes = std::max(classes, y + 1);
      }
      cl_logreg.seed = cl.seed;
      const double f1 = logreg_classify(train, test, classes, cl_logreg);
      auto out = open_out(cl.out);
      out << nlohmann::json{{"macro_f1", f1}}.dump(2) << '\n';
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
