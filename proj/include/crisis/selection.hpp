#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crisis/indicators.hpp"

namespace crisis::selection {

struct SelectionConfig {
  double corr_threshold = 0.84;  // |R_s| at or above this marks a redundant pair
  double cum_threshold = 0.90;   // cumulative variance share that fixes the component count
  bool per_group = true;         // false analyses the whole catalog as one group

  void validate() const;
};

// 1-based ranks; tied values share the average of the positions they occupy.
std::vector<double> rank_with_ties(std::span<const double> values);
bool has_ties(std::span<const double> values);

// 1 - 6 d / (N (N^2 - 1)), d the summed squared rank differences. Exact only
// for tie-free inputs.
double spearman_rank_difference(std::span<const double> x, std::span<const double> y);

// Throws DegenerateInput when either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);

// Rank-difference formula when both sides are tie-free, Pearson correlation of
// average ranks otherwise. Throws LengthMismatch or DegenerateInput.
double spearman(std::span<const double> x, std::span<const double> y);

struct Removal {
  std::string removed;
  std::string partner;       // other member of the triggering pair
  double coefficient = 0;    // R_s of the triggering pair
  double removed_mean = 0;   // mean |R_s| of the removed index against the remaining group
  double partner_mean = 0;
};

struct CorrelationReport {
  std::string group;
  std::vector<std::string> codes;  // group members in catalog order
  Eigen::MatrixXd coefficients;    // pairwise R_s
  double threshold = 0.84;
  std::vector<Removal> removals;
  std::vector<std::string> retained;
};

// Pruning rule on a precomputed coefficient matrix: while some remaining pair
// reaches the threshold in absolute value, take the strongest pair and drop the
// member with the larger mean |R_s| against the other remaining members
// (ties drop the later catalog position).
CorrelationReport prune_by_coefficients(const Eigen::MatrixXd& coefficients, std::vector<std::string> codes,
                                        double threshold, std::string group = {});

CorrelationReport prune_correlated(const IndicatorMatrix& matrix, std::span<const std::string> group,
                                   const SelectionConfig& config);

// (x - mean) / s per column, s the n-1 sample standard deviation.
Eigen::MatrixXd standardize(const Eigen::MatrixXd& data, std::span<const std::string> names = {});
Eigen::MatrixXd standardize(const IndicatorMatrix& matrix);

// Z^T Z / (n - 1).
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& z);

struct EigenDecomposition {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column j pairs with values(j); largest |entry| positive
  int sweeps = 0;
};

// Cyclic Jacobi rotations until the largest off-diagonal magnitude falls
// below 1e-12 (scaled by the largest entry when that exceeds 1), at most 100
// sweeps.
EigenDecomposition eigen_sym(const Eigen::MatrixXd& symmetric);

struct ComponentRow {
  std::size_t component = 0;
  std::string code;          // index mapped to this component
  double eigenvalue = 0;
  double contribution = 0;   // percent
  double cumulative = 0;     // percent
  bool retained = false;
};

struct PcaReport {
  std::string group;
  std::vector<std::string> codes;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd loadings;
  std::vector<ComponentRow> rows;    // one per component, descending eigenvalue
  std::size_t components_kept = 0;
  std::vector<std::string> retained;  // catalog order
};

// Component count from the eigenvalues of a correlation matrix; each component
// is mapped greedily to the unassigned index with the largest |loading|.
PcaReport pca_from_correlation(const Eigen::MatrixXd& correlation, std::vector<std::string> codes,
                               double cum_threshold, std::string group = {});

PcaReport pca_select(const IndicatorMatrix& matrix, std::span<const std::string> group,
                     const SelectionConfig& config);

struct SelectionResult {
  IndicatorCatalog final_catalog;
  std::vector<CorrelationReport> correlation;
  std::vector<PcaReport> pca;
  std::vector<std::string> passthrough_groups;  // single-index groups, not analysed
};

SelectionResult select_catalog(const IndicatorMatrix& matrix, const IndicatorCatalog& catalog,
                               const SelectionConfig& config);

std::string format_selection_text(const SelectionResult& result);

// Writes selection.txt, correlation.csv, pca.csv and final_catalog.txt into
// `dir`; returns the paths written.
std::vector<std::filesystem::path> write_selection_reports(const SelectionResult& result,
                                                           const std::filesystem::path& dir);

}  // namespace crisis::selection
