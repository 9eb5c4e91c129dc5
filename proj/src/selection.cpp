#include "crisis/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>

#include "crisis/csv.hpp"
#include "crisis/error.hpp"

namespace crisis::selection {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void SelectionConfig::validate() const {
  if (!(corr_threshold > 0 && corr_threshold <= 1))
    throw Error(ErrorCode::ConfigError, "corr_threshold must lie in (0, 1]");
  if (!(cum_threshold > 0 && cum_threshold <= 1))
    throw Error(ErrorCode::ConfigError, "cum_threshold must lie in (0, 1]");
}

std::vector<double> rank_with_ties(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share rank mean(i+1 .. j+1).
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

bool has_ties(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "correlation inputs differ in length");
  if (x.size() < 2) throw Error(ErrorCode::DegenerateInput, "correlation needs at least two observations");
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateInput, "non-finite value in correlation input");
  for (double v : y)
    if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateInput, "non-finite value in correlation input");
}

std::vector<double> column_of(const MatrixXd& m, Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

void require_finite(const MatrixXd& m, std::span<const std::string> names) {
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r)
      if (!std::isfinite(m(r, c))) {
        const std::string name =
            static_cast<std::size_t>(c) < names.size() ? names[static_cast<std::size_t>(c)] : std::to_string(c);
        throw Error(ErrorCode::DegenerateInput, "non-finite value in column '" + name + "'");
      }
}

std::vector<Index> columns_for(const IndicatorMatrix& matrix, std::span<const std::string> group) {
  std::vector<Index> cols;
  for (const auto& code : group) {
    auto c = matrix.column(code);
    if (!c) throw Error(ErrorCode::CatalogMismatch, "matrix has no column '" + code + "'");
    cols.push_back(static_cast<Index>(*c));
  }
  return cols;
}

}  // namespace

double spearman_rank_difference(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = rank_with_ties(x);
  const auto ry = rank_with_ties(y);
  double d = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) d += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const auto n = static_cast<double>(rx.size());
  return 1.0 - 6.0 * d / (n * (n * n - 1.0));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0;
  double sxx = 0;
  double syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) throw Error(ErrorCode::DegenerateInput, "correlation of a constant vector is undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y))
    throw Error(ErrorCode::DegenerateInput, "rank correlation of a constant vector is undefined");
  if (!has_ties(x) && !has_ties(y)) return spearman_rank_difference(x, y);
  const auto rx = rank_with_ties(x);
  const auto ry = rank_with_ties(y);
  return pearson(rx, ry);
}

CorrelationReport prune_by_coefficients(const MatrixXd& coefficients, std::vector<std::string> codes,
                                        double threshold, std::string group) {
  const auto p = static_cast<Index>(codes.size());
  if (coefficients.rows() != p || coefficients.cols() != p)
    throw Error(ErrorCode::LengthMismatch, "coefficient matrix does not match the group size");

  CorrelationReport report;
  report.group = std::move(group);
  report.coefficients = coefficients;
  report.threshold = threshold;

  std::vector<bool> alive(codes.size(), true);
  auto mean_abs = [&](std::size_t k) {
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < codes.size(); ++j) {
      if (j == k || !alive[j]) continue;
      sum += std::abs(coefficients(static_cast<Index>(k), static_cast<Index>(j)));
      ++count;
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
  };

  while (true) {
    std::optional<std::pair<std::size_t, std::size_t>> worst;
    double worst_abs = -1;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < codes.size(); ++j) {
        if (!alive[j]) continue;
        const double a = std::abs(coefficients(static_cast<Index>(i), static_cast<Index>(j)));
        if (a >= threshold && a > worst_abs) {
          worst_abs = a;
          worst = {i, j};
        }
      }
    }
    if (!worst) break;
    const auto [i, j] = *worst;
    const double mi = mean_abs(i);
    const double mj = mean_abs(j);
    const std::size_t drop = mi > mj ? i : j;
    const std::size_t keep = drop == i ? j : i;
    report.removals.push_back({codes[drop], codes[keep],
                               coefficients(static_cast<Index>(i), static_cast<Index>(j)), drop == i ? mi : mj,
                               drop == i ? mj : mi});
    alive[drop] = false;
  }
  for (std::size_t k = 0; k < codes.size(); ++k)
    if (alive[k]) report.retained.push_back(codes[k]);
  report.codes = std::move(codes);
  return report;
}

CorrelationReport prune_correlated(const IndicatorMatrix& matrix, std::span<const std::string> group,
                                   const SelectionConfig& config) {
  config.validate();
  const auto cols = columns_for(matrix, group);
  std::vector<std::string> codes(group.begin(), group.end());
  if (codes.size() >= 2 && matrix.rows() < 2)
    throw Error(ErrorCode::DegenerateInput, "correlation analysis needs at least two rows");

  const auto p = static_cast<Index>(codes.size());
  MatrixXd coeff = MatrixXd::Identity(p, p);
  for (Index a = 0; a < p; ++a) {
    const auto xa = column_of(matrix.values, cols[static_cast<std::size_t>(a)]);
    for (Index b = a + 1; b < p; ++b) {
      const auto xb = column_of(matrix.values, cols[static_cast<std::size_t>(b)]);
      try {
        coeff(a, b) = coeff(b, a) = spearman(xa, xb);
      } catch (const Error& e) {
        throw Error(e.code(), "columns '" + codes[static_cast<std::size_t>(a)] + "' and '" +
                                  codes[static_cast<std::size_t>(b)] + "': " + e.detail());
      }
    }
  }
  const std::string group_name = group.empty() ? std::string() : matrix.columns[static_cast<std::size_t>(cols[0])].group;
  return prune_by_coefficients(coeff, std::move(codes), config.corr_threshold, group_name);
}

MatrixXd standardize(const MatrixXd& data, std::span<const std::string> names) {
  if (data.rows() < 2) throw Error(ErrorCode::DegenerateInput, "standardization needs at least two rows");
  require_finite(data, names);
  const auto n = static_cast<double>(data.rows());
  MatrixXd z(data.rows(), data.cols());
  for (Index c = 0; c < data.cols(); ++c) {
    const double mean = data.col(c).sum() / n;
    const VectorXd centered = data.col(c).array() - mean;
    const double sd = std::sqrt(centered.squaredNorm() / (n - 1.0));
    if (sd == 0 || !std::isfinite(sd)) {
      const std::string name =
          static_cast<std::size_t>(c) < names.size() ? names[static_cast<std::size_t>(c)] : std::to_string(c);
      throw Error(ErrorCode::DegenerateInput, "column '" + name + "' is constant");
    }
    z.col(c) = centered / sd;
  }
  return z;
}

MatrixXd standardize(const IndicatorMatrix& matrix) {
  std::vector<std::string> names;
  for (const auto& id : matrix.columns) names.push_back(id.code);
  return standardize(matrix.values, names);
}

MatrixXd correlation_matrix(const MatrixXd& z) {
  if (z.rows() < 2) throw Error(ErrorCode::DegenerateInput, "correlation matrix needs at least two rows");
  MatrixXd r = (z.transpose() * z) / static_cast<double>(z.rows() - 1);
  // Symmetrize exactly; the product is symmetric up to summation order.
  return 0.5 * (r + r.transpose());
}

EigenDecomposition eigen_sym(const MatrixXd& symmetric) {
  if (symmetric.rows() != symmetric.cols()) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  if (!symmetric.allFinite()) throw Error(ErrorCode::DegenerateInput, "matrix has non-finite entries");
  const Index n = symmetric.rows();
  if ((symmetric - symmetric.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric within 1e-9");

  MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
  MatrixXd v = MatrixXd::Identity(n, n);
  const double scale = std::max(1.0, n > 0 ? a.cwiseAbs().maxCoeff() : 1.0);
  const double tolerance = 1e-12 * scale;
  constexpr int kMaxSweeps = 100;

  auto max_off_diagonal = [&] {
    double m = 0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) m = std::max(m, std::abs(a(p, q)));
    return m;
  };

  EigenDecomposition out;
  int sweep = 0;
  while (max_off_diagonal() >= tolerance) {
    if (sweep == kMaxSweeps) throw Error(ErrorCode::NoConvergence, "Jacobi iteration did not converge in 100 sweeps");
    ++sweep;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  out.sweeps = sweep;

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) > a(y, y); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.values(j) = a(src, src);
    VectorXd col = v.col(src);
    Index big = 0;
    for (Index k = 1; k < n; ++k)
      if (std::abs(col(k)) > std::abs(col(big))) big = k;
    if (col(big) < 0) col = -col;
    out.vectors.col(j) = col;
  }
  return out;
}

PcaReport pca_from_correlation(const MatrixXd& correlation, std::vector<std::string> codes, double cum_threshold,
                               std::string group) {
  const auto p = static_cast<Index>(codes.size());
  if (correlation.rows() != p || correlation.cols() != p)
    throw Error(ErrorCode::LengthMismatch, "correlation matrix does not match the group size");
  if (!(cum_threshold > 0 && cum_threshold <= 1))
    throw Error(ErrorCode::ConfigError, "cum_threshold must lie in (0, 1]");

  const EigenDecomposition eig = eigen_sym(correlation);
  PcaReport report;
  report.group = std::move(group);
  report.eigenvalues = eig.values;
  report.loadings = eig.vectors;

  double total = 0;
  for (Index j = 0; j < p; ++j) total += std::max(eig.values(j), 0.0);
  if (!(total > 0)) throw Error(ErrorCode::DegenerateInput, "correlation matrix has no positive eigenvalue");

  std::vector<bool> assigned(codes.size(), false);
  double cumulative = 0;
  std::optional<std::size_t> kept;
  for (Index j = 0; j < p; ++j) {
    ComponentRow row;
    row.component = static_cast<std::size_t>(j) + 1;
    row.eigenvalue = eig.values(j);
    const double share = std::max(eig.values(j), 0.0) / total;
    cumulative += share;
    row.contribution = 100.0 * share;
    row.cumulative = 100.0 * std::min(cumulative, 1.0);

    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < codes.size(); ++k) {
      if (assigned[k]) continue;
      if (!best || std::abs(eig.vectors(static_cast<Index>(k), j)) >
                       std::abs(eig.vectors(static_cast<Index>(*best), j)))
        best = k;
    }
    assigned[*best] = true;
    row.code = codes[*best];
    if (!kept) row.retained = true;
    // The tolerance absorbs rounding in sums that are exactly at the threshold
    // (equal eigenvalues).
    if (!kept && cumulative >= cum_threshold - 1e-12) kept = static_cast<std::size_t>(j) + 1;
    report.rows.push_back(std::move(row));
  }
  report.components_kept = kept.value_or(codes.size());

  for (const auto& code : codes) {
    const bool keep = std::any_of(report.rows.begin(), report.rows.end(),
                                  [&](const ComponentRow& r) { return r.retained && r.code == code; });
    if (keep) report.retained.push_back(code);
  }
  report.codes = std::move(codes);
  return report;
}

PcaReport pca_select(const IndicatorMatrix& matrix, std::span<const std::string> group,
                     const SelectionConfig& config) {
  config.validate();
  const auto cols = columns_for(matrix, group);
  MatrixXd data(matrix.values.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) data.col(static_cast<Index>(k)) = matrix.values.col(cols[k]);
  std::vector<std::string> codes(group.begin(), group.end());
  const MatrixXd r = correlation_matrix(standardize(data, codes));
  const std::string group_name = group.empty() ? std::string() : matrix.columns[static_cast<std::size_t>(cols[0])].group;
  return pca_from_correlation(r, std::move(codes), config.cum_threshold, group_name);
}

SelectionResult select_catalog(const IndicatorMatrix& matrix, const IndicatorCatalog& catalog,
                               const SelectionConfig& config) {
  config.validate();
  SelectionResult result;
  std::vector<std::vector<std::string>> groups;
  std::vector<std::string> group_names;
  if (config.per_group) {
    for (const auto& g : catalog.groups()) {
      groups.push_back(catalog.group_codes(g));
      group_names.push_back(g);
    }
  } else {
    groups.push_back(catalog.codes());
    group_names.push_back("all");
  }

  std::vector<std::string> survivors;
  std::vector<std::string> failures;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    if (members.size() == 1) {
      result.passthrough_groups.push_back(group_names[g]);
      survivors.push_back(members.front());
      continue;
    }
    try {
      CorrelationReport corr = prune_correlated(matrix, members, config);
      corr.group = group_names[g];
      PcaReport pca = pca_select(matrix, corr.retained, config);
      pca.group = group_names[g];
      survivors.insert(survivors.end(), pca.retained.begin(), pca.retained.end());
      result.correlation.push_back(std::move(corr));
      result.pca.push_back(std::move(pca));
    } catch (const Error& e) {
      failures.push_back("group " + group_names[g] + ": " + std::string(to_string(e.code())) + ": " + e.detail());
    }
  }
  if (!failures.empty()) {
    std::string msg;
    for (const auto& f : failures) msg += (msg.empty() ? "" : "; ") + f;
    throw Error(ErrorCode::DegenerateInput, msg);
  }
  result.final_catalog = catalog.subset(survivors);
  return result;
}

std::string format_selection_text(const SelectionResult& result) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  for (std::size_t g = 0; g < result.correlation.size(); ++g) {
    const auto& corr = result.correlation[g];
    out << "== Group " << corr.group << " (" << group_title(corr.group) << ")\n";
    out << "Correlation analysis, threshold " << std::setprecision(3) << corr.threshold << "\n";
    out << std::setw(8) << "";
    for (const auto& c : corr.codes) out << std::setw(8) << c;
    out << '\n';
    for (std::size_t i = 0; i < corr.codes.size(); ++i) {
      out << std::setw(8) << corr.codes[i];
      for (std::size_t j = 0; j < corr.codes.size(); ++j) {
        if (j < i) {
          out << std::setw(8) << "";
        } else {
          out << std::setw(8) << std::setprecision(3) << corr.coefficients(static_cast<Index>(i), static_cast<Index>(j));
        }
      }
      out << '\n';
    }
    if (corr.removals.empty()) out << "No pair reaches the threshold; all indexes retained.\n";
    for (const auto& r : corr.removals) {
      out << "Removed " << r.removed << ": R_s(" << r.removed << ", " << r.partner << ") = " << std::setprecision(3)
          << r.coefficient << ", mean |R_s| " << r.removed_mean << " vs " << r.partner_mean << "\n";
    }
    const auto& pca = result.pca[g];
    out << "Principal components\n" << std::setw(8) << "Index" << std::setw(14) << "Cumulative%" << std::setw(14) << "Contribution%"
        << std::setw(14) << "Eigenvalue" << "\n";
    for (const auto& row : pca.rows) {
      out << std::setw(8) << row.code << std::setw(14) << std::setprecision(3) << row.cumulative << std::setw(14)
          << row.contribution << std::setw(14) << row.eigenvalue << (row.retained ? "  kept" : "  dropped") << "\n";
    }
    out << "Components kept: " << pca.components_kept << "\n\n";
  }
  for (const auto& g : result.passthrough_groups) out << "== Group " << g << ": single index, passed through\n";
  out << "Final catalog:";
  for (const auto& c : result.final_catalog.codes()) out << ' ' << c;
  out << '\n';
  return out.str();
}

std::vector<std::filesystem::path> write_selection_reports(const SelectionResult& result,
                                                           const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::filesystem::path> written;
  auto open = [&](const char* name) {
    std::filesystem::path path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write '" + path.string() + "'");
    written.push_back(path);
    return out;
  };

  {
    auto out = open("selection.txt");
    out << format_selection_text(result);
  }
  {
    auto out = open("correlation.csv");
    out << "group,index_a,index_b,spearman,removed\n";
    for (const auto& corr : result.correlation) {
      for (std::size_t i = 0; i < corr.codes.size(); ++i)
        for (std::size_t j = i + 1; j < corr.codes.size(); ++j) {
          const bool removed = std::any_of(corr.removals.begin(), corr.removals.end(), [&](const Removal& r) {
            return (r.removed == corr.codes[i] && r.partner == corr.codes[j]) ||
                   (r.removed == corr.codes[j] && r.partner == corr.codes[i]);
          });
          out << corr.group << ',' << corr.codes[i] << ',' << corr.codes[j] << ','
              << csv::format_number(corr.coefficients(static_cast<Index>(i), static_cast<Index>(j))) << ','
              << (removed ? 1 : 0) << '\n';
        }
    }
  }
  {
    auto out = open("pca.csv");
    out << "group,component,index,eigenvalue,contribution_pct,cumulative_pct,retained\n";
    for (const auto& pca : result.pca)
      for (const auto& row : pca.rows)
        out << pca.group << ',' << row.component << ',' << row.code << ',' << csv::format_number(row.eigenvalue) << ','
            << csv::format_number(row.contribution) << ',' << csv::format_number(row.cumulative) << ','
            << (row.retained ? 1 : 0) << '\n';
  }
  {
    auto out = open("final_catalog.txt");
    for (const auto& c : result.final_catalog.codes()) out << c << '\n';
  }
  return written;
}

}  // namespace crisis::selection
