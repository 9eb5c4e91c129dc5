#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "crisis/error.hpp"
#include "crisis/rating.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace crisis;
using namespace crisis::rating;

namespace {

BenchmarkMatrix one_indicator(double lo, double hi) {
  BenchmarkMatrix bm;
  bm.columns = IndicatorCatalog::parse("C121").ids();
  bm.values.resize(kLevels, 1);
  bm.values << hi, (2 * hi + lo) / 3, (hi + 2 * lo) / 3, lo;
  return bm;
}

Eigen::VectorXd random_observation(std::mt19937_64& rng, const BenchmarkMatrix& bm) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(bm.size()));
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double lo = bm.values.col(k).minCoeff();
    const double hi = bm.values.col(k).maxCoeff();
    std::uniform_real_distribution<double> u(0.5 * lo, 1.2 * hi);
    x(k) = u(rng);
  }
  return x;
}

}  // namespace

TEST(Gra, LevelLabels) {
  EXPECT_EQ(level_label(1), "Giant");
  EXPECT_EQ(level_label(2), "Serious");
  EXPECT_EQ(level_label(3), "Intermediate");
  EXPECT_EQ(level_label(4), "Light");
}

TEST(Gra, BenchmarkRowsAreFixedPoints) {
  const BenchmarkMatrix bm = default_benchmarks();
  for (Normalization mode : {Normalization::None, Normalization::BenchmarkMax}) {
    GraConfig cfg;
    cfg.normalization = mode;
    for (int i = 0; i < kLevels; ++i) {
      const CrisisAssessment a = rate(Eigen::VectorXd(bm.values.row(i).transpose()), bm, cfg);
      EXPECT_NEAR(a.gamma(i), 1.0, 1e-12);
      EXPECT_EQ(a.level, i + 1);
      for (int j = 0; j < kLevels; ++j)
        if (j != i) EXPECT_LT(a.gamma(j), 1.0);
    }
  }
}

TEST(Gra, SingleIndicatorHandValues) {
  // Benchmarks 10, 20/3, 10/3, 0 and x0 = 0: deltas are 10, 20/3, 10/3, 0.
  const BenchmarkMatrix bm = one_indicator(0, 10);
  GraConfig cfg;
  cfg.normalization = Normalization::None;
  const CrisisAssessment a = rate(Eigen::VectorXd::Zero(1), bm, cfg);
  EXPECT_NEAR(a.gamma(0), 5.0 / 15.0, 1e-15);
  EXPECT_NEAR(a.gamma(1), 5.0 / (20.0 / 3 + 5), 1e-15);
  EXPECT_NEAR(a.gamma(2), 5.0 / (10.0 / 3 + 5), 1e-15);
  EXPECT_NEAR(a.gamma(3), 1.0, 1e-15);
  EXPECT_EQ(a.level, 4);
  EXPECT_DOUBLE_EQ(a.breakdown.global_min, 0);
  EXPECT_DOUBLE_EQ(a.breakdown.global_max, 10);
}

TEST(Gra, MatchesBruteForceOracle) {
  const BenchmarkMatrix bm = default_benchmarks();
  const auto refs = oracle::paper_benchmarks();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> wdist(0.1, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::VectorXd x = random_observation(rng, bm);
    GraConfig cfg;
    cfg.rho = 0.1 + 0.8 * (trial % 9) / 8.0;
    cfg.normalization = trial % 2 == 0 ? Normalization::BenchmarkMax : Normalization::None;
    if (trial % 3 == 0) {
      cfg.weights.resize(13);
      for (double& w : cfg.weights) w = wdist(rng);
    }
    const std::vector<double> w = cfg.weights.empty() ? std::vector<double>(13, 1.0 / 13) : cfg.weights;
    const auto expected = oracle::gra_gamma(std::vector<double>(x.data(), x.data() + 13), refs, w, cfg.rho,
                                            cfg.normalization == Normalization::BenchmarkMax);
    const CrisisAssessment a = rate(x, bm, cfg);
    for (int i = 0; i < kLevels; ++i) EXPECT_NEAR(a.gamma(i), expected[static_cast<std::size_t>(i)], 1e-9);
    EXPECT_EQ(a.level, oracle::best_level(expected));
  }
}

TEST(Gra, CoefficientsAreBounded) {
  const BenchmarkMatrix bm = default_benchmarks();
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 100; ++trial) {
    const CrisisAssessment a = rate(random_observation(rng, bm), bm, GraConfig{});
    EXPECT_GT(a.breakdown.xi.minCoeff(), 0.0);
    EXPECT_LE(a.breakdown.xi.maxCoeff(), 1.0 + 1e-15);
    EXPECT_NEAR(a.breakdown.xi.maxCoeff(), 1.0, 1e-12);  // the cell holding the global minimum
  }
}

TEST(Gra, WeightScaleInvariance) {
  const BenchmarkMatrix bm = default_benchmarks();
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> wdist(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    GraConfig a;
    a.weights.resize(13);
    for (double& w : a.weights) w = wdist(rng);
    GraConfig b = a;
    for (double& w : b.weights) w *= 7.5;
    const Eigen::VectorXd x = random_observation(rng, bm);
    EXPECT_LE((rate(x, bm, a).gamma - rate(x, bm, b).gamma).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Gra, IndicatorPermutationInvariance) {
  const BenchmarkMatrix bm = default_benchmarks();
  std::mt19937_64 rng(20);
  std::vector<int> perm(13);
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 30; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    BenchmarkMatrix shuffled = bm;
    const Eigen::VectorXd x = random_observation(rng, bm);
    Eigen::VectorXd xs(13);
    for (int k = 0; k < 13; ++k) {
      shuffled.columns[static_cast<std::size_t>(k)] = bm.columns[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
      shuffled.values.col(k) = bm.values.col(perm[static_cast<std::size_t>(k)]);
      xs(k) = x(perm[static_cast<std::size_t>(k)]);
    }
    EXPECT_LE((rate(x, bm, GraConfig{}).gamma - rate(xs, shuffled, GraConfig{}).gamma).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Gra, DegreesGrowWithRho) {
  const BenchmarkMatrix bm = default_benchmarks();
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd x = random_observation(rng, bm);
    LevelVector previous = LevelVector::Zero();
    for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      GraConfig cfg;
      cfg.rho = rho;
      const LevelVector g = rate(x, bm, cfg).gamma;
      for (int i = 0; i < kLevels; ++i) EXPECT_GE(g(i), previous(i) - 1e-12);
      previous = g;
    }
  }
}

TEST(Gra, TiesGoToMoreSevereLevel) {
  LevelVector g;
  g << 0.5, 0.7, 0.7, 0.1;
  EXPECT_EQ(argmax_level(g), 2);
  g << 0.3, 0.3, 0.3, 0.3;
  EXPECT_EQ(argmax_level(g), 1);
}

TEST(Gra, ExactMatchOnEveryLevelGivesAllOnes) {
  BenchmarkMatrix bm = one_indicator(0, 10);
  bm.values << 1, 1, 1, 1;
  const LevelMatrix delta = weighted_deltas(Eigen::VectorXd::Ones(1), bm.values, std::vector<double>{1});
  const LevelMatrix xi = relational_coefficients(delta, extrema(delta), 0.5);
  EXPECT_EQ(xi, LevelMatrix::Ones(kLevels, 1));
}

TEST(Gra, ErrorCases) {
  const BenchmarkMatrix bm = default_benchmarks();
  const Eigen::VectorXd x = bm.values.row(0).transpose();
  for (double rho : {0.0, 1.0, -0.2, 1.5}) {
    GraConfig cfg;
    cfg.rho = rho;
    try {
      rate(x, bm, cfg);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidRho);
      EXPECT_EQ(exit_code_for(e.code()), 2);
    }
  }
  GraConfig wrong;
  wrong.weights = {1, 2};
  try {
    rate(x, bm, wrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  BenchmarkMatrix zero = one_indicator(0, 10);
  zero.values << 0, 0, 0, 0;
  try {
    normalize(Eigen::VectorXd::Ones(1), zero.values, Normalization::BenchmarkMax);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroColumn);
  }
  Eigen::VectorXd nan = x;
  nan(3) = std::numeric_limits<double>::quiet_NaN();
  try {
    rate(nan, bm, GraConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
  }
}

TEST(Gra, AlignByCodeOrQuantity) {
  const BenchmarkMatrix bm = default_benchmarks().restrict_to(IndicatorCatalog::parse("C121,C124"));
  EXPECT_EQ(bm.codes(), (std::vector<std::string>{"likes", "posts"}));
  IndicatorVector v(0, {"C121", "C124"});
  v.set("C121", 3000);
  v.set("C124", 15000);
  EXPECT_EQ(align(v, bm), Eigen::Vector2d(3000, 15000));
  IndicatorVector partial(4, {"C121"});
  partial.set("C121", 1);
  try {
    align(partial, bm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompleteVector);
    EXPECT_NE(std::string(e.what()).find("posts"), std::string::npos);
  }
}

TEST(Gra, RestrictReportsUnmatchedCodes) {
  std::vector<std::string> unmatched;
  const auto bm = default_benchmarks().restrict_to(IndicatorCatalog::parse("C111,C121,C125"), &unmatched);
  EXPECT_EQ(bm.size(), 1u);
  EXPECT_EQ(unmatched, (std::vector<std::string>{"C111", "C125"}));
  try {
    default_benchmarks().restrict_to(IndicatorCatalog::parse("C111"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CatalogMismatch);
  }
}

TEST(Benchmarks, ParseAndRoundTrip) {
  std::istringstream in(
      "# two indicators\n"
      "indicators likes,posts\n"
      "Giant 40 400\n"
      "Serious 30 300\n"
      "Intermediate 20 200\n"
      "Light 10 100\n"
      "weight 0.25 0.75\n");
  const BenchmarkMatrix bm = parse_benchmarks(in);
  EXPECT_EQ(bm.codes(), (std::vector<std::string>{"likes", "posts"}));
  EXPECT_EQ(bm.weights, (std::vector<double>{0.25, 0.75}));
  EXPECT_DOUBLE_EQ(bm.values(2, 1), 200);
  EXPECT_EQ(resolve_weights(bm, GraConfig{}), bm.weights);
  GraConfig explicit_weights;
  explicit_weights.weights = {1, 1};
  EXPECT_EQ(resolve_weights(bm, explicit_weights), explicit_weights.weights);

  std::stringstream buf;
  write_benchmarks(bm, buf);
  const BenchmarkMatrix back = parse_benchmarks(buf);
  EXPECT_EQ(back.values, bm.values);
  EXPECT_EQ(back.weights, bm.weights);
  EXPECT_EQ(back.codes(), bm.codes());
}

TEST(Benchmarks, HeaderlessFileUsesRatingOrder) {
  std::stringstream buf;
  write_benchmarks(default_benchmarks(), buf);
  std::string text = buf.str();
  text = text.substr(text.find('\n') + 1);
  std::istringstream in(text);
  const BenchmarkMatrix bm = parse_benchmarks(in);
  EXPECT_EQ(bm.codes(), IndicatorCatalog::rating_order().codes());
  EXPECT_EQ(bm.values, default_benchmarks().values);
  EXPECT_EQ(resolve_weights(bm, GraConfig{}), std::vector<double>(13, 1.0 / 13));
}

TEST(Benchmarks, MalformedFilesRejected) {
  for (const char* text : {"Giant 1 2\nSerious 1 2\n", "indicators likes\nGiant 1\nSerious x\nIntermediate 3\nLight 4\n",
                           "indicators likes posts\nGiant 1 2\nSerious 1 3\nIntermediate 3 4\nLight 4\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_benchmarks(in), Error) << text;
  }
}

TEST(Gra, EscalatingTimelineFile) {
  const auto vectors = read_indicator_csv(testing_support::data_dir() / "escalation_indicators.csv");
  ASSERT_EQ(vectors.size(), 4u);
  for (Normalization mode : {Normalization::None, Normalization::BenchmarkMax}) {
    GraConfig cfg;
    cfg.normalization = mode;
    std::vector<int> levels;
    for (const auto& v : vectors) levels.push_back(rate(v, default_benchmarks(), cfg).level);
    EXPECT_EQ(levels, (std::vector<int>{4, 3, 2, 1}));
  }
}

TEST(Gra, AssessmentCsvLayout) {
  const BenchmarkMatrix bm = default_benchmarks();
  std::vector<RatedBucket> rows{{7, rate(Eigen::VectorXd(bm.values.row(1).transpose()), bm, GraConfig{})}};
  const std::string csv = format_assessment_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "bucket,gamma_1,gamma_2,gamma_3,gamma_4,level,label");
  EXPECT_NE(csv.find("\n7,"), std::string::npos);
  EXPECT_NE(csv.find(",2,Serious\n"), std::string::npos);
}
