#include <fstream>
#include <sstream>

#include "crisis/csv.hpp"
#include "crisis/error.hpp"
#include "crisis/sentiment.hpp"

namespace crisis::sentiment {

namespace {

constexpr std::string_view kMagic = "crisis-sentiment-model";
constexpr int kFormatVersion = 1;

[[noreturn]] void bad_model(const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, "model file: " + what);
}

std::string next_line(std::istream& in, const char* expecting) {
  std::string line;
  if (!std::getline(in, line)) bad_model(std::string("truncated, expected ") + expecting);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void write_model(const SentimentModel& model, std::ostream& out) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "dims " << model.vocab.size() << ' ' << model.embed_dim() << ' ' << model.hidden_size() << '\n';
  out << "vocab\n";
  for (const auto& t : model.vocab.tokens()) out << t << '\n';
  for_each_block(model, [&out](std::string_view name, const auto& block) {
    out << "block " << name << ' ' << block.rows() << ' ' << block.cols() << '\n';
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        if (c) out << ' ';
        out << csv::format_number(block(r, c));
      }
      out << '\n';
    }
  });
  out << "end\n";
}

void save_model(const SentimentModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write '" + path.string() + "'");
  write_model(model, out);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "write failed for '" + path.string() + "'");
}

SentimentModel read_model(std::istream& in) {
  {
    std::istringstream header(next_line(in, "header"));
    std::string magic;
    int version = 0;
    if (!(header >> magic >> version) || magic != kMagic) bad_model("not a sentiment model");
    if (version != kFormatVersion) bad_model("unsupported version " + std::to_string(version));
  }
  std::size_t vocab_size = 0;
  int d = 0;
  int h = 0;
  {
    std::istringstream dims(next_line(in, "dims"));
    std::string tag;
    if (!(dims >> tag >> vocab_size >> d >> h) || tag != "dims" || vocab_size < 2 || d <= 0 || h <= 0)
      bad_model("bad dims line");
  }
  if (next_line(in, "vocab") != "vocab") bad_model("missing vocab section");
  Vocab vocab;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    const std::string token = next_line(in, "vocab token");
    if (i < 2) {
      if (token != vocab.token(static_cast<int>(i))) bad_model("special tokens out of place");
      continue;
    }
    if (token.empty() || vocab.add(token) != static_cast<int>(i)) bad_model("duplicate vocab token '" + token + "'");
  }

  SentimentModel model = SentimentModel::zeros(std::move(vocab), d, h);
  for_each_block(model, [&in](std::string_view name, auto& block) {
    std::istringstream head(next_line(in, "block header"));
    std::string tag;
    std::string got;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(head >> tag >> got >> rows >> cols) || tag != "block" || got != name)
      bad_model("expected block '" + std::string(name) + "'");
    if (rows != block.rows() || cols != block.cols()) bad_model("block '" + got + "' has wrong shape");
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::istringstream line(next_line(in, "block row"));
      std::string field;
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(line >> field)) bad_model("short row in block '" + got + "'");
        try {
          block(r, c) = csv::parse_number(field);
        } catch (const Error&) {
          bad_model("bad number '" + field + "' in block '" + got + "'");
        }
      }
    }
  });
  if (next_line(in, "end") != "end") bad_model("missing end marker");
  return model;
}

SentimentModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open '" + path.string() + "'");
  try {
    return read_model(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace crisis::sentiment
