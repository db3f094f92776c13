#include "hrlme/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace hrlme {

namespace {

constexpr const char* kWordEmb = "cnn.word_emb";
constexpr const char* kPosHead = "cnn.pos_head";
constexpr const char* kPosTail = "cnn.pos_tail";
constexpr const char* kConvW = "cnn.conv_w";
constexpr const char* kConvB = "cnn.conv_b";
constexpr const char* kOutW = "cnn.out_w";
constexpr const char* kOutB = "cnn.out_b";

nn::ParamSet init_params(const EstimatorConfig& c, std::uint64_t seed) {
  nn::Rng rng(seed);
  const Eigen::Index d = c.word_dim + 2 * c.pos_dim;
  const auto vocab = static_cast<Eigen::Index>(c.vocab_size);
  const auto n_r = static_cast<Eigen::Index>(c.n_relations);

  nn::ParamSet p;
  nn::Matrix word(vocab, c.word_dim);
  nn::fill_uniform(word, 0.5 / static_cast<double>(c.word_dim), rng);
  nn::Matrix head(kNumPositionBuckets, c.pos_dim);
  nn::fill_uniform(head, 0.5 / static_cast<double>(c.pos_dim), rng);
  nn::Matrix tail(kNumPositionBuckets, c.pos_dim);
  nn::fill_uniform(tail, 0.5 / static_cast<double>(c.pos_dim), rng);
  nn::Matrix conv(c.feature_maps, 3 * d);
  nn::fill_uniform(conv, std::sqrt(6.0 / static_cast<double>(3 * d + c.feature_maps)), rng);
  nn::Matrix out(n_r, c.feature_maps);
  nn::fill_uniform(out, std::sqrt(6.0 / static_cast<double>(c.feature_maps + n_r)), rng);

  p.add(kWordEmb, std::move(word));
  p.add(kPosHead, std::move(head));
  p.add(kPosTail, std::move(tail));
  p.add(kConvW, std::move(conv));
  p.add(kConvB, nn::Matrix::Zero(c.feature_maps, 1));
  p.add(kOutW, std::move(out));
  p.add(kOutB, nn::Matrix::Zero(n_r, 1));
  return p;
}

}  // namespace

CnnEstimator::CnnEstimator(const EstimatorConfig& config, std::uint64_t seed)
    : CnnEstimator(config, init_params(config, seed)) {}

CnnEstimator::CnnEstimator(const EstimatorConfig& config, nn::ParamSet params)
    : config_(config), params_(std::move(params)) {
  word_emb_ = params_.index_of(kWordEmb);
  pos_head_ = params_.index_of(kPosHead);
  pos_tail_ = params_.index_of(kPosTail);
  conv_w_ = params_.index_of(kConvW);
  conv_b_ = params_.index_of(kConvB);
  out_w_ = params_.index_of(kOutW);
  out_b_ = params_.index_of(kOutB);
}

CnnEstimator CnnEstimator::from_checkpoint(const Checkpoint& ckpt) {
  EstimatorConfig c;
  const nn::Matrix& word = ckpt.at(kWordEmb);
  const nn::Matrix& out = ckpt.at(kOutW);
  c.vocab_size = static_cast<std::size_t>(word.rows());
  c.word_dim = word.cols();
  c.pos_dim = ckpt.at(kPosHead).cols();
  c.feature_maps = out.cols();
  c.n_relations = static_cast<std::size_t>(out.rows());
  CnnEstimator est(c, init_params(c, 0));
  import_params(ckpt, est.params_);
  est.frozen_ = true;
  return est;
}

void CnnEstimator::export_to(Checkpoint& ckpt) const { export_params(params_, ckpt); }

nn::ParamSet& CnnEstimator::mutable_params() {
  if (frozen_) {
    throw std::logic_error("estimator is frozen");
  }
  return params_;
}

nn::Matrix CnnEstimator::encode(const Sentence& sentence) const {
  const auto rows = static_cast<Eigen::Index>(sentence.size());
  const Eigen::Index dw = config_.word_dim;
  const Eigen::Index dp = config_.pos_dim;
  const nn::Matrix& words = params_.value(word_emb_);
  const nn::Matrix& head = params_.value(pos_head_);
  const nn::Matrix& tail = params_.value(pos_tail_);

  nn::Matrix x(rows, input_dim());
  for (Eigen::Index j = 0; j < rows; ++j) {
    int id = sentence.token_ids[static_cast<std::size_t>(j)];
    if (id < 0 || id >= words.rows()) {
      id = kUnkId;
    }
    x.row(j).head(dw) = words.row(id);
    x.row(j).segment(dw, dp) = head.row(position_bucket(static_cast<int>(j), sentence.head_idx));
    x.row(j).tail(dp) = tail.row(position_bucket(static_cast<int>(j), sentence.tail_idx));
  }
  return x;
}

CnnEstimator::Output CnnEstimator::forward(const Sentence& sentence) const {
  const nn::Matrix x = encode(sentence);
  nn::PoolResult pool = nn::conv3_maxpool(x, params_.value(conv_w_), params_.value(conv_b_).col(0));
  Output out;
  out.repr = pool.pooled.array().tanh().matrix();
  out.pooled = std::move(pool.pooled);
  nn::Vector logits = params_.value(out_w_) * out.repr + params_.value(out_b_).col(0);
  out.probs = nn::softmax(logits);
  return out;
}

double CnnEstimator::prob_of(const Sentence& sentence, std::size_t relation) const {
  if (relation >= config_.n_relations) {
    throw std::out_of_range("prob_of: relation " + std::to_string(relation) + " out of range");
  }
  return std::max(forward(sentence).probs(static_cast<Eigen::Index>(relation)), nn::kProbFloor);
}

nn::Vector CnnEstimator::word_embedding(int token_id) const {
  const nn::Matrix& words = params_.value(word_emb_);
  if (token_id < 0 || token_id >= words.rows()) {
    token_id = kUnkId;
  }
  return words.row(token_id).transpose();
}

double CnnEstimator::accumulate_gradient(const Sentence& sentence, std::size_t label, double scale,
                                         nn::Rng* dropout_rng, double dropout_p) {
  nn::ParamSet& p = mutable_params();
  const nn::Matrix x = encode(sentence);
  const nn::Matrix& conv_w = p.value(conv_w_);
  const nn::PoolResult pool = nn::conv3_maxpool(x, conv_w, p.value(conv_b_).col(0));
  const nn::Vector repr = pool.pooled.array().tanh().matrix();

  nn::Vector mask = nn::Vector::Ones(repr.size());
  if (dropout_rng != nullptr && dropout_p > 0.0) {
    const double keep = 1.0 - dropout_p;
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
      mask(i) = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
    }
  }
  const nn::Vector hidden = repr.cwiseProduct(mask);
  const nn::Vector probs = nn::softmax(p.value(out_w_) * hidden + p.value(out_b_).col(0));
  const double loss = nn::cross_entropy(probs, static_cast<Eigen::Index>(label));

  nn::Vector d_logits = probs;
  d_logits(static_cast<Eigen::Index>(label)) -= 1.0;
  d_logits *= scale;
  p.grad(out_w_).noalias() += d_logits * hidden.transpose();
  p.grad(out_b_).col(0) += d_logits;
  const nn::Vector d_repr = (p.value(out_w_).transpose() * d_logits).cwiseProduct(mask);
  const nn::Vector d_pooled = d_repr.array() * (1.0 - repr.array().square());

  nn::Matrix d_x = nn::Matrix::Zero(x.rows(), x.cols());
  nn::Vector d_conv_b = nn::Vector::Zero(conv_w.rows());
  nn::conv3_maxpool_backward(x, conv_w, pool.argmax, d_pooled, p.grad(conv_w_), d_conv_b, d_x);
  p.grad(conv_b_).col(0) += d_conv_b;

  const Eigen::Index dw = config_.word_dim;
  const Eigen::Index dp = config_.pos_dim;
  nn::Matrix& g_words = p.grad(word_emb_);
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    int id = sentence.token_ids[static_cast<std::size_t>(j)];
    if (id < 0 || id >= g_words.rows()) {
      id = kUnkId;
    }
    g_words.row(id) += d_x.row(j).head(dw);
    p.grad(pos_head_).row(position_bucket(static_cast<int>(j), sentence.head_idx)) += d_x.row(j).segment(dw, dp);
    p.grad(pos_tail_).row(position_bucket(static_cast<int>(j), sentence.tail_idx)) += d_x.row(j).tail(dp);
  }
  return loss;
}

std::vector<const Sentence*> sentences_of(const Corpus& corpus, bool include_test) {
  std::vector<const Sentence*> out;
  for (const auto& bag : corpus.bags) {
    if (!include_test && bag.split != Split::kTrain) {
      continue;
    }
    for (const auto& s : bag.sentences) {
      out.push_back(&s);
    }
  }
  return out;
}

double mean_loss(const CnnEstimator& estimator, const std::vector<const Sentence*>& sentences) {
  if (sentences.empty()) {
    return 0.0;
  }
  double total = 0.0;
  for (const Sentence* s : sentences) {
    total += nn::cross_entropy(estimator.forward(*s).probs, static_cast<Eigen::Index>(s->relation_id));
  }
  return total / static_cast<double>(sentences.size());
}

EstimatorTrainLog train_estimator(CnnEstimator& estimator, const Corpus& corpus,
                                  const EstimatorTrainOptions& options) {
  if (estimator.frozen()) {
    throw std::logic_error("train_estimator: estimator is frozen");
  }
  std::vector<const Sentence*> data = sentences_of(corpus, options.include_test);
  if (data.empty()) {
    throw std::invalid_argument("train_estimator: corpus has no training sentences");
  }
  const std::size_t batch = std::min(std::max<std::size_t>(options.batch, 1), data.size());
  nn::Rng rng(options.seed);
  EstimatorTrainLog log;
  nn::ParamSet& params = estimator.mutable_params();
  params.zero_grad();

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(data);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < data.size(); start += batch) {
      const std::size_t end = std::min(start + batch, data.size());
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        epoch_loss += estimator.accumulate_gradient(*data[i], data[i]->relation_id, scale, &rng, options.dropout);
      }
      nn::sgd_step(params, options.lr);
    }
    log.epoch_loss.push_back(epoch_loss / static_cast<double>(data.size()));
  }
  estimator.freeze();
  return log;
}

}  // namespace hrlme
