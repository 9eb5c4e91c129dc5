#include <cmath>

#include "crisis/error.hpp"
#include "crisis/sentiment.hpp"

namespace crisis::sentiment {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd sigmoid(const VectorXd& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

VectorXd tanh_of(const VectorXd& a) {
  return a.unaryExpr([](double v) { return std::tanh(v); });
}

VectorXd concat(const VectorXd& hidden, const VectorXd& input) {
  VectorXd z(hidden.size() + input.size());
  z << hidden, input;
  return z;
}

struct StepCache {
  VectorXd z;  // [S_{t-1}, x_t]
  VectorXd forget, input, candidate, output;
  VectorXd cell_prev, cell, cell_tanh;
};

struct Trace {
  std::vector<StepCache> steps;
  VectorXd hidden;  // S_T
};

Trace run_cell(std::span<const VectorXd> inputs, const LstmParams& p, std::vector<VectorXd>* hidden_out) {
  if (inputs.empty()) throw Error(ErrorCode::EmptySequence, "LSTM input sequence is empty");
  const int h = p.hidden_size();
  for (const auto& x : inputs)
    if (x.size() != p.input_size())
      throw Error(ErrorCode::LengthMismatch, "input vector size does not match LSTM input size");

  Trace trace;
  trace.steps.reserve(inputs.size());
  VectorXd hidden = VectorXd::Zero(h);
  VectorXd cell = VectorXd::Zero(h);
  for (const auto& x : inputs) {
    StepCache s;
    s.z = concat(hidden, x);
    s.forget = sigmoid(p.w_forget * s.z + p.b_forget);
    s.input = sigmoid(p.w_input * s.z + p.b_input);
    s.candidate = tanh_of(p.w_cell * s.z + p.b_cell);
    s.output = sigmoid(p.w_output * s.z + p.b_output);
    s.cell_prev = cell;
    cell = s.forget.cwiseProduct(cell) + s.input.cwiseProduct(s.candidate);
    s.cell = cell;
    s.cell_tanh = tanh_of(cell);
    hidden = s.output.cwiseProduct(s.cell_tanh);
    if (hidden_out) hidden_out->push_back(hidden);
    trace.steps.push_back(std::move(s));
  }
  trace.hidden = hidden;
  return trace;
}

std::vector<VectorXd> embed(std::span<const int> token_ids, const SentimentModel& model) {
  if (token_ids.empty()) throw Error(ErrorCode::EmptySequence, "token sequence is empty");
  std::vector<VectorXd> xs;
  xs.reserve(token_ids.size());
  const auto rows = model.embeddings.rows();
  for (int id : token_ids) {
    if (id < 0 || id >= rows) throw Error(ErrorCode::InvalidArgument, "token id out of vocabulary range");
    xs.push_back(model.embeddings.row(id).transpose());
  }
  return xs;
}

Logits head_logits(const VectorXd& hidden, const SentimentModel& model) {
  const VectorXd z = model.head * hidden + model.head_bias;
  return {z(0), z(1), z(2)};
}

}  // namespace

LstmParams LstmParams::zeros(int input_size, int hidden_size) {
  LstmParams p;
  const int cols = input_size + hidden_size;
  p.w_forget = MatrixXd::Zero(hidden_size, cols);
  p.w_input = MatrixXd::Zero(hidden_size, cols);
  p.w_cell = MatrixXd::Zero(hidden_size, cols);
  p.w_output = MatrixXd::Zero(hidden_size, cols);
  p.b_forget = VectorXd::Zero(hidden_size);
  p.b_input = VectorXd::Zero(hidden_size);
  p.b_cell = VectorXd::Zero(hidden_size);
  p.b_output = VectorXd::Zero(hidden_size);
  return p;
}

bool LstmParams::operator==(const LstmParams& o) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return same(w_forget, o.w_forget) && same(w_input, o.w_input) && same(w_cell, o.w_cell) &&
         same(w_output, o.w_output) && same(b_forget, o.b_forget) && same(b_input, o.b_input) &&
         same(b_cell, o.b_cell) && same(b_output, o.b_output);
}

LstmOutput lstm_forward(std::span<const VectorXd> inputs, const LstmParams& params) {
  LstmOutput out;
  out.hidden.reserve(inputs.size());
  Trace trace = run_cell(inputs, params, &out.hidden);
  out.final_cell = trace.steps.back().cell;
  return out;
}

SentimentModel SentimentModel::zeros(Vocab vocab, int embed_dim, int hidden_size) {
  SentimentModel m;
  m.embeddings = MatrixXd::Zero(static_cast<Eigen::Index>(vocab.size()), embed_dim);
  m.vocab = std::move(vocab);
  m.lstm = LstmParams::zeros(embed_dim, hidden_size);
  m.head = MatrixXd::Zero(kNumClasses, hidden_size);
  m.head_bias = VectorXd::Zero(kNumClasses);
  return m;
}

bool SentimentModel::operator==(const SentimentModel& o) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return vocab == o.vocab && same(embeddings, o.embeddings) && lstm == o.lstm && same(head, o.head) &&
         same(head_bias, o.head_bias);
}

Gradients Gradients::zeros_like(const SentimentModel& model) {
  Gradients g;
  g.embeddings = MatrixXd::Zero(model.embeddings.rows(), model.embeddings.cols());
  g.lstm = LstmParams::zeros(model.embed_dim(), model.hidden_size());
  g.head = MatrixXd::Zero(model.head.rows(), model.head.cols());
  g.head_bias = VectorXd::Zero(model.head_bias.size());
  return g;
}

Probabilities softmax(const Logits& logits) {
  const double top = std::max({logits[0], logits[1], logits[2]});
  Probabilities p{};
  double sum = 0;
  for (int k = 0; k < kNumClasses; ++k) {
    p[k] = std::exp(logits[k] - top);
    sum += p[k];
  }
  for (auto& v : p) v /= sum;
  return p;
}

int argmax(const Probabilities& probs) {
  int best = 0;
  for (int k = 1; k < kNumClasses; ++k)
    if (probs[k] > probs[best]) best = k;
  return best;
}

Logits logits_for(std::span<const int> token_ids, const SentimentModel& model) {
  const auto xs = embed(token_ids, model);
  const Trace trace = run_cell(xs, model.lstm, nullptr);
  return head_logits(trace.hidden, model);
}

Probabilities predict_proba(std::string_view text, const SentimentModel& model) {
  const auto tokens = tokenize(text);
  const auto ids = model.vocab.encode(tokens);
  return softmax(logits_for(ids, model));
}

int classify(std::string_view text, const SentimentModel& model) { return argmax(predict_proba(text, model)); }

double example_loss(std::span<const int> token_ids, int label, const SentimentModel& model, Gradients* grad) {
  if (label < 0 || label >= kNumClasses) throw Error(ErrorCode::InvalidArgument, "label out of range");
  const auto xs = embed(token_ids, model);
  const Trace trace = run_cell(xs, model.lstm, nullptr);
  const Logits z = head_logits(trace.hidden, model);

  const double top = std::max({z[0], z[1], z[2]});
  double sum = 0;
  for (double v : z) sum += std::exp(v - top);
  const double log_norm = top + std::log(sum);
  const double loss = log_norm - z[static_cast<std::size_t>(label)];
  if (grad == nullptr) return loss;

  const LstmParams& p = model.lstm;
  const int h = p.hidden_size();

  VectorXd d_logits(kNumClasses);
  for (int k = 0; k < kNumClasses; ++k) d_logits(k) = std::exp(z[static_cast<std::size_t>(k)] - log_norm);
  d_logits(label) -= 1.0;

  grad->head += d_logits * trace.hidden.transpose();
  grad->head_bias += d_logits;

  VectorXd d_hidden = model.head.transpose() * d_logits;
  VectorXd d_cell = VectorXd::Zero(h);
  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    const StepCache& s = trace.steps[t];
    const VectorXd d_out = d_hidden.cwiseProduct(s.cell_tanh);
    d_cell += d_hidden.cwiseProduct(s.output).cwiseProduct(
        (1.0 - s.cell_tanh.array().square()).matrix());

    const VectorXd d_forget = d_cell.cwiseProduct(s.cell_prev);
    const VectorXd d_input = d_cell.cwiseProduct(s.candidate);
    const VectorXd d_candidate = d_cell.cwiseProduct(s.input);

    const VectorXd a_forget = d_forget.array() * s.forget.array() * (1.0 - s.forget.array());
    const VectorXd a_input = d_input.array() * s.input.array() * (1.0 - s.input.array());
    const VectorXd a_cell = d_candidate.array() * (1.0 - s.candidate.array().square());
    const VectorXd a_output = d_out.array() * s.output.array() * (1.0 - s.output.array());

    grad->lstm.w_forget += a_forget * s.z.transpose();
    grad->lstm.w_input += a_input * s.z.transpose();
    grad->lstm.w_cell += a_cell * s.z.transpose();
    grad->lstm.w_output += a_output * s.z.transpose();
    grad->lstm.b_forget += a_forget;
    grad->lstm.b_input += a_input;
    grad->lstm.b_cell += a_cell;
    grad->lstm.b_output += a_output;

    const VectorXd d_z = p.w_forget.transpose() * a_forget + p.w_input.transpose() * a_input +
                         p.w_cell.transpose() * a_cell + p.w_output.transpose() * a_output;
    grad->embeddings.row(token_ids[t]) += d_z.tail(d_z.size() - h).transpose();
    d_hidden = d_z.head(h);
    d_cell = d_cell.cwiseProduct(s.forget);
  }
  return loss;
}

}  // namespace crisis::sentiment
