#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "crisis/csv.hpp"
#include "crisis/error.hpp"
#include "crisis/sentiment.hpp"

namespace crisis::sentiment {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void fill_uniform(MatrixXd& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  // Column-major storage order is the fill order.
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

void check_hyperparams(const Hyperparams& hp) {
  if (hp.embed_dim <= 0 || hp.hidden_size <= 0 || hp.epochs <= 0 || hp.min_count == 0 ||
      !(hp.learning_rate > 0) || hp.clip_norm < 0)
    throw Error(ErrorCode::InvalidArgument, "hyperparameters must be positive");
}

struct BlockRef {
  double* data;
  Eigen::Index size;
};

template <typename T>
std::vector<BlockRef> blocks_of(T& params) {
  std::vector<BlockRef> out;
  for_each_block(params, [&out](std::string_view, auto& block) { out.push_back({block.data(), block.size()}); });
  return out;
}

double squared_norm(Gradients& g) {
  double total = 0;
  for (const auto& b : blocks_of(g))
    for (Eigen::Index i = 0; i < b.size; ++i) total += b.data[i] * b.data[i];
  return total;
}

void scale(Gradients& g, double factor) {
  for (const auto& b : blocks_of(g))
    for (Eigen::Index i = 0; i < b.size; ++i) b.data[i] *= factor;
}

}  // namespace

SentimentModel initialize_model(Vocab vocab, const Hyperparams& hp, const PretrainedEmbeddings* pretrained) {
  check_hyperparams(hp);
  const int d = hp.embed_dim;
  const int h = hp.hidden_size;
  if (pretrained != nullptr && pretrained->dim != d)
    throw Error(ErrorCode::InvalidArgument, "pretrained embedding dimension " + std::to_string(pretrained->dim) +
                                                " does not match embed_dim " + std::to_string(d));

  SentimentModel m = SentimentModel::zeros(std::move(vocab), d, h);
  std::mt19937_64 rng(hp.seed);
  fill_uniform(m.embeddings, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  const double gate_bound = 1.0 / std::sqrt(static_cast<double>(h + d));
  fill_uniform(m.lstm.w_forget, gate_bound, rng);
  fill_uniform(m.lstm.w_input, gate_bound, rng);
  fill_uniform(m.lstm.w_cell, gate_bound, rng);
  fill_uniform(m.lstm.w_output, gate_bound, rng);
  fill_uniform(m.head, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  m.lstm.b_forget.setConstant(1.0);

  if (pretrained != nullptr) {
    for (std::size_t i = 0; i < m.vocab.size(); ++i) {
      auto it = pretrained->vectors.find(m.vocab.token(static_cast<int>(i)));
      if (it != pretrained->vectors.end()) m.embeddings.row(static_cast<Eigen::Index>(i)) = it->second.transpose();
    }
  }
  return m;
}

double training_accuracy(std::span<const LabeledExample> corpus, const SentimentModel& model) {
  if (corpus.empty()) return 0;
  std::size_t hits = 0;
  for (const auto& ex : corpus)
    if (classify(ex.text, model) == ex.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(corpus.size());
}

TrainResult train(std::span<const LabeledExample> corpus, const Hyperparams& hp,
                  const PretrainedEmbeddings* pretrained) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "training corpus is empty");
  std::array<std::size_t, kNumClasses> per_class{};
  for (const auto& ex : corpus) {
    if (ex.label < 0 || ex.label >= kNumClasses) throw Error(ErrorCode::InvalidArgument, "label out of range");
    ++per_class[static_cast<std::size_t>(ex.label)];
  }
  for (int k = 0; k < kNumClasses; ++k)
    if (per_class[static_cast<std::size_t>(k)] == 0)
      throw Error(ErrorCode::DegenerateCorpus, "class '" + std::string(class_name(k)) + "' has no examples");
  check_hyperparams(hp);

  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(corpus.size());
  for (const auto& ex : corpus) tokenized.push_back(tokenize(ex.text));
  Vocab vocab = Vocab::build(tokenized, hp.min_count);

  TrainResult result{initialize_model(std::move(vocab), hp, pretrained), {}, {}};
  SentimentModel& model = result.model;

  std::vector<std::vector<int>> encoded;
  encoded.reserve(corpus.size());
  for (const auto& tokens : tokenized) encoded.push_back(model.vocab.encode(tokens));

  // Shuffling draws from its own stream so the init sequence does not depend
  // on batch settings.
  std::mt19937_64 order_rng(hp.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = hp.batch_size == 0 ? corpus.size() : std::min(hp.batch_size, corpus.size());

  Gradients grad = Gradients::zeros_like(model);
  std::vector<int> touched;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    if (hp.batch_size != 0) std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(begin + batch, order.size());
      touched.clear();
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t idx = order[k];
        epoch_loss += example_loss(encoded[idx], corpus[idx].label, model, &grad);
        touched.insert(touched.end(), encoded[idx].begin(), encoded[idx].end());
      }
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

      scale(grad, 1.0 / static_cast<double>(end - begin));
      if (hp.clip_norm > 0) {
        const double norm = std::sqrt(squared_norm(grad));
        if (norm > hp.clip_norm) scale(grad, hp.clip_norm / norm);
      }

      const double lr = hp.learning_rate;
      model.lstm.w_forget -= lr * grad.lstm.w_forget;
      model.lstm.w_input -= lr * grad.lstm.w_input;
      model.lstm.w_cell -= lr * grad.lstm.w_cell;
      model.lstm.w_output -= lr * grad.lstm.w_output;
      model.lstm.b_forget -= lr * grad.lstm.b_forget;
      model.lstm.b_input -= lr * grad.lstm.b_input;
      model.lstm.b_cell -= lr * grad.lstm.b_cell;
      model.lstm.b_output -= lr * grad.lstm.b_output;
      model.head -= lr * grad.head;
      model.head_bias -= lr * grad.head_bias;
      for (int row : touched) {
        model.embeddings.row(row) -= lr * grad.embeddings.row(row);
        grad.embeddings.row(row).setZero();
      }
      grad.lstm = LstmParams::zeros(model.embed_dim(), model.hidden_size());
      grad.head.setZero();
      grad.head_bias.setZero();
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(corpus.size()));
    const double acc = training_accuracy(corpus, model);
    result.accuracy_history.push_back(acc);
    if (hp.stop_at_full_accuracy && acc >= 1.0) break;
  }
  return result;
}

double grad_check(const SentimentModel& model, const LabeledExample& example, double step,
                  const GradientHook& hook) {
  const auto ids = model.vocab.encode(tokenize(example.text));
  Gradients analytic = Gradients::zeros_like(model);
  example_loss(ids, example.label, model, &analytic);
  if (hook) hook(analytic);

  SentimentModel probe = model;
  const auto params = blocks_of(probe);
  const auto grads = blocks_of(analytic);
  double worst = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (Eigen::Index i = 0; i < params[b].size; ++i) {
      double& theta = params[b].data[i];
      const double saved = theta;
      theta = saved + step;
      const double up = example_loss(ids, example.label, probe);
      theta = saved - step;
      const double down = example_loss(ids, example.label, probe);
      theta = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = grads[b].data[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

PretrainedEmbeddings read_pretrained(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open '" + path.string() + "'");
  PretrainedEmbeddings out;
  std::string line;
  std::size_t count = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::SchemaViolation, path.string() + ": empty file");
  {
    std::istringstream header(line);
    if (!(header >> count >> out.dim) || out.dim <= 0)
      throw Error(ErrorCode::SchemaViolation, path.string() + ": line 1: expected '<count> <dim>'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) continue;
    VectorXd v(out.dim);
    std::string field;
    for (int k = 0; k < out.dim; ++k) {
      if (!(row >> field))
        throw Error(ErrorCode::SchemaViolation, path.string() + ": line " + std::to_string(line_no) +
                                                    ": expected " + std::to_string(out.dim) + " values");
      try {
        v(k) = csv::parse_number(field);
      } catch (const Error&) {
        throw Error(ErrorCode::SchemaViolation,
                    path.string() + ": line " + std::to_string(line_no) + ": bad value '" + field + "'");
      }
    }
    out.vectors.insert_or_assign(token, std::move(v));
  }
  if (out.vectors.size() != count)
    throw Error(ErrorCode::SchemaViolation, path.string() + ": header announces " + std::to_string(count) +
                                                " vectors, found " + std::to_string(out.vectors.size()));
  return out;
}

CorpusSplit split_corpus(std::span<const LabeledExample> corpus, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0 && train_fraction < 1))
    throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(corpus.size())));
  CorpusSplit split;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < cut ? split.train : split.test).push_back(corpus[order[i]]);
  return split;
}

std::vector<CorpusSplit> kfold_splits(std::span<const LabeledExample> corpus, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > corpus.size()) throw Error(ErrorCode::InvalidArgument, "invalid fold count");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<CorpusSplit> out(folds);
  const std::size_t n = corpus.size();
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * n / folds;
    const std::size_t hi = (f + 1) * n / folds;
    for (std::size_t i = 0; i < n; ++i)
      (i >= lo && i < hi ? out[f].test : out[f].train).push_back(corpus[order[i]]);
  }
  return out;
}

}  // namespace crisis::sentiment
