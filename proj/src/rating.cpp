#include "crisis/rating.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "crisis/csv.hpp"
#include "crisis/error.hpp"

namespace crisis::rating {

using Eigen::Index;
using Eigen::VectorXd;

std::string_view level_label(int level) {
  switch (level) {
    case 1: return "Giant";
    case 2: return "Serious";
    case 3: return "Intermediate";
    case 4: return "Light";
    default: return "Unknown";
  }
}

std::string_view to_string(Normalization mode) {
  return mode == Normalization::None ? "none" : "benchmark-max";
}

Normalization parse_normalization(std::string_view text) {
  if (text == "none") return Normalization::None;
  if (text == "benchmark-max") return Normalization::BenchmarkMax;
  throw Error(ErrorCode::ConfigError,
              "normalization must be 'none' or 'benchmark-max', got '" + std::string(text) + "'");
}

void GraConfig::validate(std::size_t n) const {
  if (!(rho > 0 && rho < 1)) throw Error(ErrorCode::InvalidRho, "rho must lie in (0, 1), got " + csv::format_number(rho));
  if (weights.empty()) return;
  if (weights.size() != n)
    throw Error(ErrorCode::ConfigError, "expected " + std::to_string(n) + " weights, got " +
                                            std::to_string(weights.size()));
  for (double w : weights)
    if (!(w > 0) || !std::isfinite(w)) throw Error(ErrorCode::ConfigError, "weights must be positive and finite");
}

std::vector<std::string> BenchmarkMatrix::codes() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& id : columns) out.push_back(id.code);
  return out;
}

void BenchmarkMatrix::validate() const {
  if (columns.empty()) throw Error(ErrorCode::InvalidArgument, "benchmark matrix has no indicators");
  if (values.cols() != static_cast<Index>(columns.size()))
    throw Error(ErrorCode::InvalidArgument, "benchmark rows do not match the indicator count");
  if (!weights.empty() && weights.size() != columns.size())
    throw Error(ErrorCode::InvalidArgument, "benchmark weight row does not match the indicator count");
  if (!values.allFinite()) throw Error(ErrorCode::InvalidArgument, "benchmark matrix has non-finite entries");
  for (int a = 0; a < kLevels; ++a)
    for (int b = a + 1; b < kLevels; ++b)
      if (values.row(a) == values.row(b))
        throw Error(ErrorCode::InvalidArgument, "benchmark levels " + std::to_string(a + 1) + " and " +
                                                    std::to_string(b + 1) + " are identical");
}

BenchmarkMatrix BenchmarkMatrix::restrict_to(const IndicatorCatalog& catalog,
                                             std::vector<std::string>* unmatched) const {
  BenchmarkMatrix out;
  out.labels = labels;
  std::vector<Index> keep;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const bool measured = std::any_of(catalog.ids().begin(), catalog.ids().end(),
                                      [&](const IndicatorId& id) { return id.quantity == columns[k].quantity; });
    if (measured) keep.push_back(static_cast<Index>(k));
  }
  if (unmatched != nullptr) {
    for (const auto& id : catalog.ids()) {
      const bool found = std::any_of(columns.begin(), columns.end(),
                                     [&](const IndicatorId& c) { return c.quantity == id.quantity; });
      if (!found) unmatched->push_back(id.code);
    }
  }
  if (keep.empty()) throw Error(ErrorCode::CatalogMismatch, "no catalog indicator has a benchmark column");
  out.values.resize(kLevels, static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.columns.push_back(columns[static_cast<std::size_t>(keep[j])]);
    out.values.col(static_cast<Index>(j)) = values.col(keep[j]);
    if (!weights.empty()) out.weights.push_back(weights[static_cast<std::size_t>(keep[j])]);
  }
  return out;
}

BenchmarkMatrix default_benchmarks() {
  BenchmarkMatrix bm;
  bm.columns = IndicatorCatalog::rating_order().ids();
  for (int i = 0; i < kLevels; ++i) bm.labels[static_cast<std::size_t>(i)] = std::string(level_label(i + 1));
  bm.values.resize(kLevels, 13);
  bm.values.row(0) << 4000, 3700, 3800, 500000, 1e9, 10000, 3.7, 4, 3.7, 4, 700, 1800, 200;
  bm.values.row(1) << 3500, 3000, 3000, 30000, 1e7, 4000, 3.5, 3.2, 3, 3.3, 600, 1200, 250;
  bm.values.row(2) << 3000, 2000, 1500, 15000, 1e5, 2000, 3, 2.8, 2, 2.5, 800, 600, 280;
  bm.values.row(3) << 2000, 1000, 800, 10000, 1e4, 1000, 1.2, 1, 1, 1.5, 500, 200, 350;
  return bm;
}

namespace {

std::vector<std::string> fields_of(std::string line) {
  std::replace(line.begin(), line.end(), ',', ' ');
  std::replace(line.begin(), line.end(), '\t', ' ');
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string f;
  while (in >> f) out.push_back(f);
  return out;
}

}  // namespace

BenchmarkMatrix parse_benchmarks(std::istream& in, const std::string& source) {
  BenchmarkMatrix bm;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  std::optional<std::vector<std::string>> header;
  std::optional<std::vector<std::string>> weight_row;
  std::size_t weight_line = 0;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](std::size_t at, const std::string& what) -> Error {
    return Error(ErrorCode::SchemaViolation, source + ": line " + std::to_string(at) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = csv::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto fields = fields_of(trimmed);
    if (fields.front() == "indicators") {
      if (header || !rows.empty()) throw fail(line_no, "indicator header must come first and only once");
      header = std::vector<std::string>(fields.begin() + 1, fields.end());
    } else if (fields.front() == "weight" || fields.front() == "weights") {
      if (weight_row) throw fail(line_no, "duplicate weight row");
      weight_row = std::vector<std::string>(fields.begin() + 1, fields.end());
      weight_line = line_no;
    } else {
      rows.push_back(std::move(fields));
      row_lines.push_back(line_no);
    }
  }

  if (header) {
    for (const auto& name : *header) {
      const IndicatorId* id = find_indicator(name);
      if (id == nullptr) throw Error(ErrorCode::SchemaViolation, source + ": unknown indicator '" + name + "'");
      bm.columns.push_back(*id);
    }
  } else {
    bm.columns = IndicatorCatalog::rating_order().ids();
  }
  if (bm.columns.empty()) throw Error(ErrorCode::SchemaViolation, source + ": empty indicator header");
  if (rows.size() != kLevels)
    throw Error(ErrorCode::SchemaViolation,
                source + ": expected 4 level rows, found " + std::to_string(rows.size()));

  const auto n = static_cast<Index>(bm.columns.size());
  bm.values.resize(kLevels, n);
  auto parse_values = [&](const std::vector<std::string>& fields, std::size_t first, std::size_t at) {
    if (fields.size() - first != static_cast<std::size_t>(n))
      throw fail(at, "expected " + std::to_string(n) + " values, found " + std::to_string(fields.size() - first));
    std::vector<double> out;
    for (std::size_t k = first; k < fields.size(); ++k) {
      try {
        out.push_back(csv::parse_number(fields[k]));
      } catch (const Error&) {
        throw fail(at, "bad number '" + fields[k] + "'");
      }
    }
    return out;
  };
  for (int i = 0; i < kLevels; ++i) {
    const auto& fields = rows[static_cast<std::size_t>(i)];
    bm.labels[static_cast<std::size_t>(i)] = fields.front();
    const auto v = parse_values(fields, 1, row_lines[static_cast<std::size_t>(i)]);
    for (Index k = 0; k < n; ++k) bm.values(i, k) = v[static_cast<std::size_t>(k)];
  }
  if (weight_row) {
    bm.weights = parse_values(*weight_row, 0, weight_line);
    for (double w : bm.weights)
      if (!(w > 0)) throw fail(weight_line, "weights must be positive");
  }
  try {
    bm.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaViolation, source + ": " + e.detail());
  }
  return bm;
}

BenchmarkMatrix read_benchmarks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open '" + path.string() + "'");
  return parse_benchmarks(in, path.string());
}

void write_benchmarks(const BenchmarkMatrix& bm, std::ostream& out) {
  out << "indicators";
  for (const auto& id : bm.columns) out << ' ' << id.code;
  out << '\n';
  for (int i = 0; i < kLevels; ++i) {
    out << bm.labels[static_cast<std::size_t>(i)];
    for (Index k = 0; k < bm.values.cols(); ++k) out << ' ' << csv::format_number(bm.values(i, k));
    out << '\n';
  }
  if (!bm.weights.empty()) {
    out << "weight";
    for (double w : bm.weights) out << ' ' << csv::format_number(w);
    out << '\n';
  }
}

VectorXd align(const IndicatorVector& x0, const BenchmarkMatrix& bm) {
  VectorXd out(static_cast<Index>(bm.size()));
  std::vector<std::string> missing;
  for (std::size_t k = 0; k < bm.size(); ++k) {
    const IndicatorId& col = bm.columns[k];
    std::optional<double> value;
    bool present = false;
    if (x0.has(col.code)) {
      present = true;
      value = x0.get(col.code);
    } else {
      for (const auto& code : x0.codes()) {
        const IndicatorId* id = find_indicator(code);
        if (id != nullptr && id->quantity == col.quantity) {
          present = true;
          value = x0.get(code);
          break;
        }
      }
    }
    if (!present || !value) {
      missing.push_back(col.code);
      continue;
    }
    out(static_cast<Index>(k)) = *value;
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::IncompleteVector,
                "bucket " + std::to_string(x0.bucket_index()) + " lacks benchmark indicators: " + list);
  }
  return out;
}

Normalized normalize(const VectorXd& x0, const LevelMatrix& benchmarks, Normalization mode,
                     std::span<const std::string> names) {
  if (x0.size() != benchmarks.cols())
    throw Error(ErrorCode::LengthMismatch, "observation has " + std::to_string(x0.size()) + " indicators, benchmarks " +
                                               std::to_string(benchmarks.cols()));
  Normalized out{x0, benchmarks};
  if (mode == Normalization::None) return out;
  for (Index k = 0; k < benchmarks.cols(); ++k) {
    const double top = benchmarks.col(k).maxCoeff();
    if (top == 0) {
      const std::string name =
          static_cast<std::size_t>(k) < names.size() ? names[static_cast<std::size_t>(k)] : std::to_string(k + 1);
      throw Error(ErrorCode::ZeroColumn, "benchmark column '" + name + "' has maximum zero");
    }
    out.x0(k) /= top;
    out.benchmarks.col(k) /= top;
  }
  return out;
}

LevelMatrix weighted_deltas(const VectorXd& x0, const LevelMatrix& benchmarks, std::span<const double> weights) {
  if (x0.size() != benchmarks.cols() || weights.size() != static_cast<std::size_t>(x0.size()))
    throw Error(ErrorCode::LengthMismatch, "observation, benchmarks and weights differ in length");
  if (!x0.allFinite()) throw Error(ErrorCode::DegenerateInput, "observation has non-finite values");
  LevelMatrix delta(kLevels, x0.size());
  for (int i = 0; i < kLevels; ++i)
    for (Index k = 0; k < x0.size(); ++k)
      delta(i, k) = weights[static_cast<std::size_t>(k)] * std::abs(x0(k) - benchmarks(i, k));
  return delta;
}

Extrema extrema(const LevelMatrix& delta) {
  if (delta.size() == 0) throw Error(ErrorCode::InvalidArgument, "delta matrix is empty");
  return {delta.minCoeff(), delta.maxCoeff()};
}

LevelMatrix relational_coefficients(const LevelMatrix& delta, const Extrema& ex, double rho) {
  if (!(rho > 0 && rho < 1)) throw Error(ErrorCode::InvalidRho, "rho must lie in (0, 1), got " + csv::format_number(rho));
  if (ex.global_max == 0) return LevelMatrix::Ones(kLevels, delta.cols());
  const double numerator = ex.global_min + rho * ex.global_max;
  return (numerator / (delta.array() + rho * ex.global_max)).matrix();
}

LevelVector relational_degree(const LevelMatrix& xi) {
  if (xi.cols() == 0) throw Error(ErrorCode::InvalidArgument, "coefficient matrix is empty");
  return xi.rowwise().mean();
}

int argmax_level(const LevelVector& gamma) {
  int best = 0;
  for (int i = 1; i < kLevels; ++i)
    if (gamma(i) > gamma(best)) best = i;
  return best + 1;
}

std::vector<double> resolve_weights(const BenchmarkMatrix& bm, const GraConfig& config) {
  config.validate(bm.size());
  if (!config.weights.empty()) return config.weights;
  if (!bm.weights.empty()) return bm.weights;
  return std::vector<double>(bm.size(), 1.0 / static_cast<double>(bm.size()));
}

CrisisAssessment rate(const VectorXd& x0, const BenchmarkMatrix& bm, const GraConfig& config) {
  bm.validate();
  const auto weights = resolve_weights(bm, config);
  const auto names = bm.codes();
  const Normalized norm = normalize(x0, bm.values, config.normalization, names);

  CrisisAssessment out;
  out.breakdown.delta = weighted_deltas(norm.x0, norm.benchmarks, weights);
  const Extrema ex = extrema(out.breakdown.delta);
  out.breakdown.global_min = ex.global_min;
  out.breakdown.global_max = ex.global_max;
  out.breakdown.xi = relational_coefficients(out.breakdown.delta, ex, config.rho);
  out.gamma = relational_degree(out.breakdown.xi);
  out.level = argmax_level(out.gamma);
  out.label = std::string(level_label(out.level));
  return out;
}

CrisisAssessment rate(const IndicatorVector& x0, const BenchmarkMatrix& bm, const GraConfig& config) {
  return rate(align(x0, bm), bm, config);
}

std::string format_assessment_csv(std::span<const RatedBucket> rows) {
  std::ostringstream out;
  out << "bucket,gamma_1,gamma_2,gamma_3,gamma_4,level,label\n";
  for (const auto& row : rows) {
    out << row.bucket;
    for (int i = 0; i < kLevels; ++i) out << ',' << csv::format_number(row.assessment.gamma(i));
    out << ',' << row.assessment.level << ',' << row.assessment.label << '\n';
  }
  return out.str();
}

void write_assessment_csv(std::span<const RatedBucket> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write '" + path.string() + "'");
  out << format_assessment_csv(rows);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "write failed for '" + path.string() + "'");
}

}  // namespace crisis::rating
