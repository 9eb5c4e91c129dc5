#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "crisis/indicators.hpp"

namespace crisis::rating {

inline constexpr int kLevels = 4;

using LevelMatrix = Eigen::Matrix<double, kLevels, Eigen::Dynamic>;
using LevelVector = Eigen::Matrix<double, kLevels, 1>;

// 1 Giant, 2 Serious, 3 Intermediate, 4 Light.
std::string_view level_label(int level);

enum class Normalization { None, BenchmarkMax };

std::string_view to_string(Normalization mode);
// Accepts "none" and "benchmark-max"; throws ConfigError otherwise.
Normalization parse_normalization(std::string_view text);

struct GraConfig {
  double rho = 0.5;
  std::vector<double> weights;  // empty: the benchmark file's weights, else uniform 1/n
  Normalization normalization = Normalization::BenchmarkMax;

  // Throws InvalidRho or ConfigError. `n` is the indicator count.
  void validate(std::size_t n) const;
};

struct BenchmarkMatrix {
  std::vector<IndicatorId> columns;
  std::array<std::string, kLevels> labels;
  LevelMatrix values;           // row i holds level i + 1
  std::vector<double> weights;  // optional, supplied with the matrix

  std::size_t size() const { return columns.size(); }
  std::vector<std::string> codes() const;

  // Throws InvalidArgument unless every entry is finite, the shapes agree and
  // no two rows are identical.
  void validate() const;

  // Keeps the columns whose quantity the catalog measures. Catalog codes with
  // no benchmark column are appended to `unmatched`. Throws CatalogMismatch if
  // no column is left.
  BenchmarkMatrix restrict_to(const IndicatorCatalog& catalog, std::vector<std::string>* unmatched = nullptr) const;
};

// The four 13-indicator reference vectors, in IndicatorCatalog::rating_order().
BenchmarkMatrix default_benchmarks();

// Plain table: optional "indicators <names...>" header, four "<label> <values...>"
// rows from level 1 to level 4, optional "weight <values...>" row. Fields may
// be separated by whitespace or commas; '#' starts a comment line. Without a
// header the 13 benchmark-order names are assumed.
BenchmarkMatrix parse_benchmarks(std::istream& in, const std::string& source = "benchmarks");
BenchmarkMatrix read_benchmarks(const std::filesystem::path& path);
void write_benchmarks(const BenchmarkMatrix& bm, std::ostream& out);

// Looks up each benchmark column in x0, by code and then by quantity. Throws
// IncompleteVector naming every missing column.
Eigen::VectorXd align(const IndicatorVector& x0, const BenchmarkMatrix& bm);

struct Normalized {
  Eigen::VectorXd x0;
  LevelMatrix benchmarks;
};

// benchmark-max divides column k of x0 and of every benchmark row by
// max_i x_i(k). Throws ZeroColumn when such a column is all zero.
Normalized normalize(const Eigen::VectorXd& x0, const LevelMatrix& benchmarks, Normalization mode,
                     std::span<const std::string> names = {});

// delta(i, k) = w_k |x0(k) - x_i(k)|. Throws LengthMismatch or DegenerateInput
// for non-finite observations.
LevelMatrix weighted_deltas(const Eigen::VectorXd& x0, const LevelMatrix& benchmarks, std::span<const double> weights);

struct Extrema {
  double global_min = 0;
  double global_max = 0;
};

// Over all levels and all indicators.
Extrema extrema(const LevelMatrix& delta);

// (min + rho max) / (delta + rho max); all ones when max is zero. Throws
// InvalidRho unless 0 < rho < 1.
LevelMatrix relational_coefficients(const LevelMatrix& delta, const Extrema& ex, double rho);

// Row means.
LevelVector relational_degree(const LevelMatrix& xi);

// 1-based argmax; ties go to the smaller (more severe) level.
int argmax_level(const LevelVector& gamma);

struct GraBreakdown {
  LevelMatrix delta;
  double global_min = 0;
  double global_max = 0;
  LevelMatrix xi;
};

struct CrisisAssessment {
  LevelVector gamma;
  int level = 0;
  std::string label;
  GraBreakdown breakdown;
};

// Weights are resolved from config, then the benchmark file, then uniform.
std::vector<double> resolve_weights(const BenchmarkMatrix& bm, const GraConfig& config);

CrisisAssessment rate(const Eigen::VectorXd& x0, const BenchmarkMatrix& bm, const GraConfig& config);
CrisisAssessment rate(const IndicatorVector& x0, const BenchmarkMatrix& bm, const GraConfig& config);

struct RatedBucket {
  std::size_t bucket = 0;
  CrisisAssessment assessment;
};

// Header "bucket,gamma_1,gamma_2,gamma_3,gamma_4,level,label".
std::string format_assessment_csv(std::span<const RatedBucket> rows);
void write_assessment_csv(std::span<const RatedBucket> rows, const std::filesystem::path& path);

}  // namespace crisis::rating
