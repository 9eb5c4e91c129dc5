#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "crisis/error.hpp"
#include "crisis/selection.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace crisis;
using namespace crisis::selection;

namespace {

Eigen::MatrixXd symmetric_from_upper(int n, const std::vector<double>& upper) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) r(i, j) = r(j, i) = upper[k++];
  return r;
}

// Correlation matrix with the given eigenvalues (summing to 4), built from a
// normalised 4x4 Hadamard basis so that the diagonal is exactly one.
Eigen::MatrixXd hadamard_correlation(const Eigen::Vector4d& lambda) {
  Eigen::Matrix4d h;
  h << 1, 1, 1, 1, 1, -1, 1, -1, 1, 1, -1, -1, 1, -1, -1, 1;
  h /= 2.0;
  return h * lambda.asDiagonal() * h.transpose();
}

}  // namespace

TEST(Ranks, TiesShareAveragePosition) {
  const std::vector<double> xs{10, 20, 20, 30};
  EXPECT_EQ(rank_with_ties(xs), (std::vector<double>{1, 2.5, 2.5, 4}));
  EXPECT_TRUE(has_ties(xs));
  const std::vector<double> ys{3, 1, 2};
  EXPECT_EQ(rank_with_ties(ys), (std::vector<double>{3, 1, 2}));
  EXPECT_FALSE(has_ties(ys));
}

TEST(Spearman, HandCase) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 1, 4, 3, 5};
  EXPECT_EQ(spearman(x, y), 0.8);
  EXPECT_EQ(spearman_rank_difference(x, y), 0.8);
  const std::vector<double> rev{5, 4, 3, 2, 1};
  EXPECT_EQ(spearman(x, rev), -1.0);
}

TEST(Spearman, TiesUsePearsonOfRanks) {
  const std::vector<double> x{1, 2, 2, 3, 4, 4};
  const std::vector<double> y{3, 1, 2, 2, 6, 5};
  EXPECT_NEAR(spearman(x, y), oracle::rank_pearson(x, y), 1e-12);
}

TEST(Spearman, RankFormulaMatchesOracleWhenTieFree) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 40;
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> y(static_cast<std::size_t>(n));
    std::iota(x.begin(), x.end(), 0.0);
    std::iota(y.begin(), y.end(), 0.0);
    std::shuffle(x.begin(), x.end(), rng);
    std::shuffle(y.begin(), y.end(), rng);
    const double r = spearman(x, y);
    EXPECT_NEAR(r, oracle::rank_pearson(x, y), 1e-12);
    EXPECT_LE(std::abs(r), 1.0);
    EXPECT_NEAR(spearman(y, x), r, 1e-15);
  }
}

TEST(Spearman, RejectsBadInput) {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> flat{4, 4, 4};
  const std::vector<double> short_y{1, 2};
  try {
    spearman(x, flat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
  }
  try {
    spearman(x, short_y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
}

TEST(Pruning, AuthorInfluenceGroup) {
  const auto r = symmetric_from_upper(5, {.763, .729, .560, .740, .874, .713, .887, .819, .812, .757});
  const auto report = prune_by_coefficients(r, {"AvgAtt", "AvgGra", "AvgFol", "Vnum", "AvgHisVol"}, 0.84);
  ASSERT_EQ(report.removals.size(), 1u);
  EXPECT_EQ(report.removals[0].removed, "AvgGra");
  EXPECT_EQ(report.removals[0].partner, "AvgHisVol");
  EXPECT_NEAR(report.removals[0].coefficient, 0.887, 1e-12);
  EXPECT_EQ(report.retained, (std::vector<std::string>{"AvgAtt", "AvgFol", "Vnum", "AvgHisVol"}));
}

TEST(Pruning, EngagementGroup) {
  const auto r = symmetric_from_upper(
      6, {.691, .657, .668, .873, .491, .833, .816, .796, .598, .755, .816, .427, .935, .721, .654});
  const auto report = prune_by_coefficients(r, {"NumB", "NumFor", "NumLik", "NumCom", "NumRes", "NumBG"}, 0.84);
  ASSERT_EQ(report.removals.size(), 1u);
  EXPECT_EQ(report.removals[0].removed, "NumRes");
}

TEST(Pruning, ChangeRateGroup) {
  const auto r = symmetric_from_upper(5, {.733, .651, .782, .883, .533, .823, .797, .731, .891, .712});
  const auto report = prune_by_coefficients(r, {"RVol", "RFor", "RRev", "RLik", "RRes"}, 0.84);
  ASSERT_EQ(report.removals.size(), 1u);
  EXPECT_EQ(report.removals[0].removed, "RRes");
}

TEST(Pruning, WeakGroupsKeepEverything) {
  const auto pair = symmetric_from_upper(2, {.823});
  EXPECT_TRUE(prune_by_coefficients(pair, {"Read", "Disc"}, 0.84).removals.empty());
  const auto sentiment = symmetric_from_upper(4, {.533, .351, .782, .526, -.397, -.151});
  EXPECT_TRUE(prune_by_coefficients(sentiment, {"Neg", "Pos", "Neu", "RNeg"}, 0.84).removals.empty());
}

TEST(Pruning, NegativeCorrelationCountsByMagnitude) {
  const auto r = symmetric_from_upper(3, {-.95, .2, .1});
  const auto report = prune_by_coefficients(r, {"a", "b", "c"}, 0.84);
  ASSERT_EQ(report.removals.size(), 1u);
  EXPECT_EQ(report.removals[0].removed, "a");
}

TEST(Pruning, EqualMeansDropLaterMember) {
  const auto r = symmetric_from_upper(2, {.9});
  const auto report = prune_by_coefficients(r, {"first", "second"}, 0.84);
  ASSERT_EQ(report.removals.size(), 1u);
  EXPECT_EQ(report.removals[0].removed, "second");
}

TEST(Standardize, UnitSampleVariance) {
  Eigen::MatrixXd data(3, 1);
  data << 1, 2, 3;
  const Eigen::MatrixXd z = standardize(data);
  EXPECT_NEAR(z(0, 0), -1, 1e-15);
  EXPECT_NEAR(z(1, 0), 0, 1e-15);
  EXPECT_NEAR(z(2, 0), 1, 1e-15);
  Eigen::MatrixXd flat(3, 2);
  flat << 1, 5, 2, 5, 3, 5;
  const std::vector<std::string> names{"x", "constant"};
  try {
    standardize(flat, names);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
    EXPECT_NE(std::string(e.what()).find("constant"), std::string::npos);
  }
}

TEST(EigenSym, KnownMatrices) {
  const auto id = eigen_sym(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(id.values, Eigen::VectorXd::Ones(3));

  Eigen::MatrixXd ones(2, 2);
  ones << 1, 1, 1, 1;
  const auto e1 = eigen_sym(ones);
  EXPECT_NEAR(e1.values(0), 2, 1e-12);
  EXPECT_NEAR(e1.values(1), 0, 1e-12);
  EXPECT_NEAR(e1.vectors(0, 0), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(e1.vectors(1, 0), std::sqrt(0.5), 1e-12);

  Eigen::MatrixXd half(2, 2);
  half << 1, .5, .5, 1;
  const auto e2 = eigen_sym(half);
  EXPECT_NEAR(e2.values(0), 1.5, 1e-12);
  EXPECT_NEAR(e2.values(1), 0.5, 1e-12);
}

TEST(EigenSym, RejectsAsymmetric) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 0, 1;
  try {
    eigen_sym(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSymmetric);
  }
}

TEST(EigenSym, RandomCorrelationProperties) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd data(20, 8);
    for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = n01(rng);
    const Eigen::MatrixXd r = correlation_matrix(standardize(data));
    const auto e = eigen_sym(r);
    EXPECT_NEAR(e.values.sum(), 8.0, 1e-9);
    for (int j = 1; j < 8; ++j) EXPECT_GE(e.values(j - 1), e.values(j));
    const Eigen::MatrixXd back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LE((back - r).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Pca, ContributionProfileKeepsThree) {
  const Eigen::Vector4d lambda = 4.0 * Eigen::Vector4d(0.58533, 0.19368, 0.16632, 0.05467);
  const auto report = pca_from_correlation(hadamard_correlation(lambda), {"a", "b", "c", "d"}, 0.90);
  EXPECT_EQ(report.components_kept, 3u);
  ASSERT_EQ(report.rows.size(), 4u);
  EXPECT_NEAR(report.rows[0].contribution, 58.533, 1e-9);
  EXPECT_NEAR(report.rows[1].contribution, 19.368, 1e-9);
  EXPECT_NEAR(report.rows[2].contribution, 16.632, 1e-9);
  EXPECT_NEAR(report.rows[3].contribution, 5.467, 1e-9);
  EXPECT_NEAR(report.rows[2].cumulative, 94.533, 1e-9);
  EXPECT_TRUE(report.rows[2].retained);
  EXPECT_FALSE(report.rows[3].retained);
  EXPECT_EQ(report.retained.size(), 3u);
}

TEST(Pca, EqualEigenvaluesKeepCeilingShare) {
  for (int p : {2, 3, 5, 7, 10}) {
    std::vector<std::string> codes;
    for (int i = 0; i < p; ++i) codes.push_back("x" + std::to_string(i));
    const auto report = pca_from_correlation(Eigen::MatrixXd::Identity(p, p), codes, 0.90);
    EXPECT_EQ(report.components_kept, static_cast<std::size_t>(std::ceil(0.9 * p - 1e-9))) << p;
  }
}

TEST(Pca, DuplicateColumnsCollapse) {
  Eigen::MatrixXd data(6, 2);
  data << 1, 1, 4, 4, 2, 2, 8, 8, 5, 5, 3, 3;
  const Eigen::MatrixXd r = correlation_matrix(standardize(data));
  EXPECT_NEAR(r(0, 1), 1.0, 1e-9);
  const auto report = pca_from_correlation(r, {"a", "b"}, 0.90);
  EXPECT_NEAR(report.rows[0].contribution, 100.0, 1e-9);
  EXPECT_NEAR(report.rows[1].contribution, 0.0, 1e-9);
  EXPECT_EQ(report.components_kept, 1u);
}

TEST(SelectCatalog, PlantedPairLosesOneMember) {
  const auto catalog = IndicatorCatalog::parse("C121,C122,C123,C211");
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n01;
  IndicatorMatrix m;
  m.columns = catalog.ids();
  m.values.resize(30, 4);
  for (int i = 0; i < 30; ++i) {
    const double a = n01(rng);
    m.values(i, 0) = a;
    m.values(i, 1) = 3 * a + 0.01 * n01(rng);
    m.values(i, 2) = n01(rng);
    m.values(i, 3) = n01(rng);
    m.bucket_indices.push_back(static_cast<std::size_t>(i));
  }
  const SelectionResult result = select_catalog(m, catalog, SelectionConfig{});
  ASSERT_EQ(result.correlation.size(), 1u);
  EXPECT_EQ(result.correlation[0].group, "B12");
  ASSERT_EQ(result.correlation[0].removals.size(), 1u);
  EXPECT_EQ(result.passthrough_groups, (std::vector<std::string>{"B21"}));
  const auto codes = result.final_catalog.codes();
  EXPECT_NE(std::find(codes.begin(), codes.end(), "C211"), codes.end());
  EXPECT_EQ(std::find(codes.begin(), codes.end(), result.correlation[0].removals[0].removed), codes.end());

  testing_support::TempDir dir;
  const auto files = write_selection_reports(result, dir.path());
  EXPECT_EQ(files.size(), 4u);
  const std::string corr = testing_support::read_file(dir / "correlation.csv");
  EXPECT_EQ(corr.substr(0, corr.find('\n')), "group,index_a,index_b,spearman,removed");
  EXPECT_FALSE(format_selection_text(result).empty());
}

TEST(SelectCatalog, IndependentGroupKeepsAll) {
  const auto catalog = IndicatorCatalog::parse("C121,C122,C123");
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n01;
  IndicatorMatrix m;
  m.columns = catalog.ids();
  m.values.resize(40, 3);
  for (Eigen::Index i = 0; i < m.values.size(); ++i) m.values.data()[i] = n01(rng);
  m.bucket_indices.resize(40);
  const SelectionResult result = select_catalog(m, catalog, SelectionConfig{});
  EXPECT_TRUE(result.correlation[0].removals.empty());
}
