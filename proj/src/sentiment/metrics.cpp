#include <cstdio>
#include <fstream>
#include <sstream>

#include "crisis/csv.hpp"
#include "crisis/error.hpp"
#include "crisis/sentiment.hpp"

namespace crisis::sentiment {

std::string_view class_name(int cls) {
  switch (cls) {
    case 0: return "positive";
    case 1: return "negative";
    case 2: return "neutral";
    default: return "unknown";
  }
}

std::string_view label_tag(int cls) {
  switch (cls) {
    case 0: return "pos";
    case 1: return "neg";
    case 2: return "neu";
    default: return "?";
  }
}

std::optional<int> parse_label(std::string_view label) {
  if (label == "pos") return 0;
  if (label == "neg") return 1;
  if (label == "neu") return 2;
  return std::nullopt;
}

EvaluationReport metrics_from_confusion(
    const std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>& confusion) {
  EvaluationReport r;
  r.confusion = confusion;
  std::uint64_t correct = 0;
  for (int t = 0; t < kNumClasses; ++t)
    for (int p = 0; p < kNumClasses; ++p) {
      r.total += confusion[t][p];
      if (t == p) correct += confusion[t][p];
    }
  if (r.total == 0) throw Error(ErrorCode::EmptyTestset, "confusion matrix is empty");
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);

  for (int k = 0; k < kNumClasses; ++k) {
    std::uint64_t predicted = 0;
    std::uint64_t actual = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      predicted += confusion[j][k];
      actual += confusion[k][j];
    }
    const auto tp = static_cast<double>(confusion[k][k]);
    ClassMetrics& m = r.per_class[k];
    m.precision_undefined = predicted == 0;
    m.recall_undefined = actual == 0;
    m.precision = predicted == 0 ? 0 : tp / static_cast<double>(predicted);
    m.recall = actual == 0 ? 0 : tp / static_cast<double>(actual);
    m.f1 = (m.precision + m.recall) == 0 ? 0 : 2 * m.precision * m.recall / (m.precision + m.recall);
    r.macro_precision += m.precision / kNumClasses;
    r.macro_recall += m.recall / kNumClasses;
  }
  const double pr = r.macro_precision + r.macro_recall;
  r.macro_f1 = pr == 0 ? 0 : 2 * r.macro_precision * r.macro_recall / pr;
  return r;
}

EvaluationReport evaluate_with(const std::function<int(std::string_view)>& classifier,
                               std::span<const LabeledExample> testset) {
  if (testset.empty()) throw Error(ErrorCode::EmptyTestset, "test set is empty");
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> confusion{};
  for (const auto& ex : testset) {
    const int predicted = classifier(ex.text);
    if (ex.label < 0 || ex.label >= kNumClasses || predicted < 0 || predicted >= kNumClasses)
      throw Error(ErrorCode::InvalidArgument, "class index out of range");
    ++confusion[static_cast<std::size_t>(ex.label)][static_cast<std::size_t>(predicted)];
  }
  return metrics_from_confusion(confusion);
}

EvaluationReport evaluate(const SentimentModel& model, std::span<const LabeledExample> testset) {
  return evaluate_with([&model](std::string_view text) { return classify(text, model); }, testset);
}

std::string format_table_row(std::string_view model_name, const EvaluationReport& report) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "\t%.2f%%\t%.2f%%\t%.2f%%", 100 * report.macro_precision,
                100 * report.macro_recall, 100 * report.macro_f1);
  return std::string(model_name) + buf;
}

int lexicon_classify(std::string_view text, const Lexicon& lexicon) {
  if (lexicon.empty()) throw Error(ErrorCode::InvalidArgument, "lexicon is empty");
  double score = 0;
  for (const auto& token : tokenize(text)) {
    auto it = lexicon.find(token);
    if (it != lexicon.end()) score += it->second;
  }
  if (score > 0) return 0;
  if (score < 0) return 1;
  return 2;
}

Lexicon read_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open '" + path.string() + "'");
  Lexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = csv::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    std::istringstream row(trimmed);
    std::string token;
    std::string score;
    if (!(row >> token >> score))
      throw Error(ErrorCode::SchemaViolation, path.string() + ": line " + std::to_string(line_no) +
                                                  ": expected '<token> <score>'");
    // Lexicon keys must match what the tokenizer emits.
    const auto normalized = tokenize(token);
    if (normalized.size() != 1)
      throw Error(ErrorCode::SchemaViolation,
                  path.string() + ": line " + std::to_string(line_no) + ": '" + token + "' is not a single token");
    try {
      lexicon[normalized.front()] = csv::parse_number(score);
    } catch (const Error&) {
      throw Error(ErrorCode::SchemaViolation,
                  path.string() + ": line " + std::to_string(line_no) + ": bad score '" + score + "'");
    }
  }
  if (lexicon.empty()) throw Error(ErrorCode::InvalidArgument, path.string() + ": lexicon is empty");
  return lexicon;
}

std::vector<LabeledExample> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open '" + path.string() + "'");
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorCode::SchemaViolation,
                  path.string() + ": line " + std::to_string(line_no) + ": expected 'label<TAB>text'");
    const auto label = parse_label(csv::trim(std::string_view(line).substr(0, tab)));
    if (!label)
      throw Error(ErrorCode::SchemaViolation,
                  path.string() + ": line " + std::to_string(line_no) + ": label must be pos, neg or neu");
    out.push_back({line.substr(tab + 1), *label});
  }
  return out;
}

RecordLabels label_records(const EventDataset& dataset, const SentimentModel& model) {
  RecordLabels labels;
  labels.blogs.reserve(dataset.blogs.size());
  labels.comments.reserve(dataset.comments.size());
  for (const auto& b : dataset.blogs) labels.blogs.push_back(static_cast<SentimentClass>(classify(b.text, model)));
  for (const auto& c : dataset.comments)
    labels.comments.push_back(static_cast<SentimentClass>(classify(c.text, model)));
  return labels;
}

}  // namespace crisis::sentiment
