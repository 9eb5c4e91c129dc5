#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "crisis/indicators.hpp"

namespace crisis::sentiment {

inline constexpr int kNumClasses = 3;
using Probabilities = std::array<double, kNumClasses>;
using Logits = std::array<double, kNumClasses>;

// Class names in model order: positive, negative, neutral.
std::string_view class_name(int cls);
// "pos" / "neg" / "neu" as used by corpus files.
std::optional<int> parse_label(std::string_view label);
std::string_view label_tag(int cls);

// Latin-script runs are split on whitespace and punctuation and lowercased;
// CJK ideographs, kana, hangul and emoji become one token per character.
std::vector<std::string> tokenize(std::string_view text);

class Vocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kPad = 1;

  Vocab();

  // Tokens seen at least `min_count` times, ordered by descending frequency
  // then lexicographically.
  static Vocab build(std::span<const std::vector<std::string>> token_lists, std::size_t min_count);

  int add(const std::string& token);
  int index(std::string_view token) const;
  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Unknown tokens map to kUnk; an empty token list encodes as {kPad}.
  std::vector<int> encode(std::span<const std::string> tokens) const;

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Gate weights act on the concatenation [S_{t-1}, x_t] (hidden first).
struct LstmParams {
  Eigen::MatrixXd w_forget, w_input, w_cell, w_output;
  Eigen::VectorXd b_forget, b_input, b_cell, b_output;

  static LstmParams zeros(int input_size, int hidden_size);
  int hidden_size() const { return static_cast<int>(w_forget.rows()); }
  int input_size() const { return static_cast<int>(w_forget.cols()) - hidden_size(); }

  bool operator==(const LstmParams& o) const;
};

struct LstmOutput {
  std::vector<Eigen::VectorXd> hidden;  // S_1 .. S_T
  Eigen::VectorXd final_cell;           // C_T
};

// Runs the cell from S_0 = C_0 = 0. Throws EmptySequence on empty input.
LstmOutput lstm_forward(std::span<const Eigen::VectorXd> inputs, const LstmParams& params);

struct SentimentModel {
  Vocab vocab;
  Eigen::MatrixXd embeddings;  // |V| x d
  LstmParams lstm;
  Eigen::MatrixXd head;        // 3 x h
  Eigen::VectorXd head_bias;   // 3

  static SentimentModel zeros(Vocab vocab, int embed_dim, int hidden_size);
  int embed_dim() const { return static_cast<int>(embeddings.cols()); }
  int hidden_size() const { return lstm.hidden_size(); }

  bool operator==(const SentimentModel& o) const;
};

// Same shapes as the trainable part of SentimentModel.
struct Gradients {
  Eigen::MatrixXd embeddings;
  LstmParams lstm;
  Eigen::MatrixXd head;
  Eigen::VectorXd head_bias;

  static Gradients zeros_like(const SentimentModel& model);
};

// Calls fn(name, block) for every parameter block of a model or gradient.
template <typename T, typename Fn>
void for_each_block(T& params, Fn&& fn) {
  fn("embeddings", params.embeddings);
  fn("w_forget", params.lstm.w_forget);
  fn("w_input", params.lstm.w_input);
  fn("w_cell", params.lstm.w_cell);
  fn("w_output", params.lstm.w_output);
  fn("b_forget", params.lstm.b_forget);
  fn("b_input", params.lstm.b_input);
  fn("b_cell", params.lstm.b_cell);
  fn("b_output", params.lstm.b_output);
  fn("head", params.head);
  fn("head_bias", params.head_bias);
}

Probabilities softmax(const Logits& logits);
// First index of the maximum; exact ties go to the lowest class.
int argmax(const Probabilities& probs);

Logits logits_for(std::span<const int> token_ids, const SentimentModel& model);
Probabilities predict_proba(std::string_view text, const SentimentModel& model);
int classify(std::string_view text, const SentimentModel& model);

struct LabeledExample {
  std::string text;
  int label = 0;
};

// Cross-entropy of one example; accumulates d(loss)/d(theta) into `grad`
// when given.
double example_loss(std::span<const int> token_ids, int label, const SentimentModel& model,
                    Gradients* grad = nullptr);

struct Hyperparams {
  int embed_dim = 16;
  int hidden_size = 16;
  double learning_rate = 0.1;
  int epochs = 500;
  std::uint64_t seed = 42;
  std::size_t min_count = 1;
  std::size_t batch_size = 5;  // 0 = full batch
  double clip_norm = 0;        // 0 = no clipping
  bool stop_at_full_accuracy = false;
};

struct PretrainedEmbeddings {
  int dim = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors;
};

// "<count> <dim>" header, then "token v1 ... vd" lines.
PretrainedEmbeddings read_pretrained(const std::filesystem::path& path);

struct TrainResult {
  SentimentModel model;
  std::vector<double> loss_history;      // mean training loss per epoch
  std::vector<double> accuracy_history;  // training accuracy per epoch
};

TrainResult train(std::span<const LabeledExample> corpus, const Hyperparams& hp,
                  const PretrainedEmbeddings* pretrained = nullptr);

// Scaled-uniform initialization: each matrix in +-1/sqrt(fan_in), biases zero
// except the forget gate at +1.
SentimentModel initialize_model(Vocab vocab, const Hyperparams& hp, const PretrainedEmbeddings* pretrained = nullptr);

double training_accuracy(std::span<const LabeledExample> corpus, const SentimentModel& model);

// Optional hook applied to the analytic gradient before comparison.
using GradientHook = std::function<void(Gradients&)>;

// max |g_a - g_n| / max(|g_a|, |g_n|, 1e-8) over every parameter, with g_n a
// central finite difference of width 2*step.
double grad_check(const SentimentModel& model, const LabeledExample& example, double step = 1e-5,
                  const GradientHook& hook = {});

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  bool precision_undefined = false;  // no prediction of this class
  bool recall_undefined = false;     // no example of this class
};

struct EvaluationReport {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> confusion{};  // [true][predicted]
  std::array<ClassMetrics, kNumClasses> per_class{};
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;  // harmonic mean of macro precision and macro recall
  double accuracy = 0;
  std::size_t total = 0;
};

EvaluationReport metrics_from_confusion(const std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>& confusion);
EvaluationReport evaluate(const SentimentModel& model, std::span<const LabeledExample> testset);
EvaluationReport evaluate_with(const std::function<int(std::string_view)>& classifier,
                               std::span<const LabeledExample> testset);

// "model<TAB>precision<TAB>recall<TAB>F1" with percentages.
std::string format_table_row(std::string_view model_name, const EvaluationReport& report);

using Lexicon = std::unordered_map<std::string, double>;

// Sum of matched token scores: > 0 positive, < 0 negative, 0 neutral.
int lexicon_classify(std::string_view text, const Lexicon& lexicon);
Lexicon read_lexicon(const std::filesystem::path& path);

// "label<TAB>text" lines with labels pos / neg / neu.
std::vector<LabeledExample> read_corpus(const std::filesystem::path& path);

struct CorpusSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
};

CorpusSplit split_corpus(std::span<const LabeledExample> corpus, double train_fraction, std::uint64_t seed);
std::vector<CorpusSplit> kfold_splits(std::span<const LabeledExample> corpus, std::size_t folds, std::uint64_t seed);

void save_model(const SentimentModel& model, const std::filesystem::path& path);
void write_model(const SentimentModel& model, std::ostream& out);
SentimentModel load_model(const std::filesystem::path& path);
SentimentModel read_model(std::istream& in);

// Labels every blog and comment of a dataset.
RecordLabels label_records(const EventDataset& dataset, const SentimentModel& model);

}  // namespace crisis::sentiment
