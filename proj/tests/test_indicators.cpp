#include <gtest/gtest.h>

#include <random>

#include "crisis/error.hpp"
#include "crisis/indicators.hpp"
#include "crisis/synth.hpp"
#include "support.hpp"

using namespace crisis;
using testing_support::TempDir;

TEST(TrimmedMean, DropsOneMaxAndOneMin) {
  const std::vector<double> xs{1, 2, 3, 100};
  EXPECT_DOUBLE_EQ(trimmed_mean(xs), 2.5);
  const std::vector<double> ties{5, 5, 5, 1, 9};
  EXPECT_DOUBLE_EQ(trimmed_mean(ties), 5.0);
  const std::vector<double> two{4, 8};
  EXPECT_DOUBLE_EQ(trimmed_mean(two), 6.0);
  const std::vector<double> one{7};
  EXPECT_DOUBLE_EQ(trimmed_mean(one), 7.0);
  try {
    trimmed_mean(std::vector<double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingData);
  }
}

TEST(TrimmedMean, BoundedByExtremes) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(3 + trial % 20);
    for (double& x : xs) x = u(rng);
    const double t = trimmed_mean(xs);
    EXPECT_GE(t, *std::min_element(xs.begin(), xs.end()));
    EXPECT_LE(t, *std::max_element(xs.begin(), xs.end()));
  }
}

TEST(RateOfChange, DividesByHours) {
  EXPECT_DOUBLE_EQ(rate_of_change(10, 30, 2), 10);
  EXPECT_DOUBLE_EQ(rate_of_change(30, 10, 4), -5);
  try {
    rate_of_change(1, 2, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidWindow);
  }
}

TEST(Catalog, KnownSystems) {
  EXPECT_EQ(IndicatorCatalog::initial().size(), 22u);
  EXPECT_EQ(IndicatorCatalog::final_system().size(), 18u);
  EXPECT_EQ(IndicatorCatalog::rating_order().size(), 13u);
  EXPECT_EQ(IndicatorCatalog::parse("paper3").codes(), (std::vector<std::string>{"C124", "C211", "C212"}));
  EXPECT_EQ(IndicatorCatalog::parse("paper7").size(), 7u);
  EXPECT_EQ(IndicatorCatalog::parse("paper11").size(), 11u);
  EXPECT_EQ(IndicatorCatalog::parse("paper14").size(), 14u);
  EXPECT_EQ(IndicatorCatalog::parse("paper18"), IndicatorCatalog::final_system());
  EXPECT_EQ(IndicatorCatalog::final_system().groups(),
            (std::vector<std::string>{"B11", "B12", "B21", "B22", "B31"}));
  EXPECT_FALSE(IndicatorCatalog::parse("paper3").needs_rates());
  EXPECT_TRUE(IndicatorCatalog::final_system().needs_sentiment());
  EXPECT_THROW(IndicatorCatalog::parse("C999"), Error);
}

TEST(Catalog, RatingOrderNames) {
  EXPECT_EQ(IndicatorCatalog::rating_order().codes(),
            (std::vector<std::string>{"likes", "comments", "reposts", "posts", "discussions", "reads", "microblogs",
                                      "post_change_rate", "repost_change_rate", "likes_change_rate", "positive",
                                      "negative", "neutral"}));
}

namespace {

EventDataset hand_dataset() {
  using testing_support::blog;
  EventDataset ds;
  ds.event_id = "hand";
  ds.start_time = 0;
  auto b1 = blog("b1", 100, 10);
  b1.author.id = "u1";
  b1.author.is_verified = true;
  b1.like_count = 4;
  b1.comment_count = 2;
  b1.forward_count = 1;
  auto b2 = blog("b2", 200, 20);
  b2.author.id = "u2";
  b2.like_count = 6;
  auto b3 = blog("b3", 300, 30, false);
  b3.author.id = "u3";
  b3.is_government = true;
  b3.like_count = 10;
  auto b4 = blog("b4", 7300, 40);
  b4.author.id = "u4";
  b4.like_count = 20;
  b4.forward_count = 8;
  auto b5 = blog("b5", 7400, 80);
  b5.author.id = "u1";  // same author posts again with a larger following
  b5.author.is_verified = true;
  auto b6 = blog("b6", 7500, 1000);
  b6.author.id = "u6";
  ds.blogs = {b1, b2, b3, b4, b5, b6};
  ds.comments = {testing_support::comment("c1", "b1", 500, 3), testing_support::comment("c2", "b4", 7600, 5)};
  ds.snapshots = {testing_support::snapshot(7000, 100, 10), testing_support::snapshot(14000, 250, 30)};
  return ds;
}

}  // namespace

TEST(ComputeVector, HandComputedBucket) {
  const EventDataset ds = hand_dataset();
  const auto buckets = bucketize(ds, 2.0);
  ASSERT_EQ(buckets.size(), 2u);
  const auto catalog = IndicatorCatalog::parse("C111,C113,C121,C122,C123,C124,C125,C126,C211,C212,C221,C222,C224,C225");

  const IndicatorVector first = compute_vector(buckets[0], nullptr, catalog, std::nullopt);
  EXPECT_DOUBLE_EQ(*first.get("C111"), 15.0);  // originals u1 (10), u2 (20): plain mean for two
  EXPECT_DOUBLE_EQ(*first.get("C113"), 1.0);
  EXPECT_DOUBLE_EQ(*first.get("C121"), 20.0);
  EXPECT_DOUBLE_EQ(*first.get("C122"), 2.0);
  EXPECT_DOUBLE_EQ(*first.get("C123"), 1.0);
  EXPECT_DOUBLE_EQ(*first.get("C124"), 3.0);
  EXPECT_DOUBLE_EQ(*first.get("C125"), 1.0);
  EXPECT_DOUBLE_EQ(*first.get("C126"), 3.0);
  EXPECT_DOUBLE_EQ(*first.get("C211"), 100.0);
  EXPECT_DOUBLE_EQ(*first.get("C212"), 10.0);
  EXPECT_FALSE(first.get("C221"));
  EXPECT_EQ(first.missing().size(), 4u);

  const IndicatorVector second = compute_vector(buckets[1], &buckets[0], catalog, std::nullopt);
  // Authors u1 (latest: 80), u2 (20), u4 (40), u6 (1000): trimmed mean (80 + 40) / 2.
  EXPECT_DOUBLE_EQ(*second.get("C111"), 60.0);
  EXPECT_DOUBLE_EQ(*second.get("C113"), 1.0);
  EXPECT_DOUBLE_EQ(*second.get("C124"), 6.0);
  EXPECT_DOUBLE_EQ(*second.get("C221"), 1.5);   // (6 - 3) / 2 h
  EXPECT_DOUBLE_EQ(*second.get("C222"), 4.0);   // (9 - 1) / 2 h
  EXPECT_DOUBLE_EQ(*second.get("C224"), 10.0);  // (40 - 20) / 2 h
  EXPECT_DOUBLE_EQ(*second.get("C225"), 2.5);   // (8 - 3) / 2 h
  EXPECT_TRUE(second.complete());
}

TEST(ComputeVector, SentimentNeedsCounts) {
  const EventDataset ds = hand_dataset();
  const auto buckets = bucketize(ds, 2.0);
  const auto catalog = IndicatorCatalog::parse("C311,C312,C313,C314");
  try {
    compute_vector(buckets[0], nullptr, catalog, std::nullopt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CatalogMismatch);
  }
  const SentimentCounts prev{1, 2, 3};
  const SentimentCounts cur{2, 8, 4};
  const auto v = compute_vector(buckets[1], &buckets[0], catalog, cur, prev);
  EXPECT_DOUBLE_EQ(*v.get("C311"), 2);
  EXPECT_DOUBLE_EQ(*v.get("C312"), 8);
  EXPECT_DOUBLE_EQ(*v.get("C313"), 4);
  EXPECT_DOUBLE_EQ(*v.get("C314"), 3);
}

TEST(ComputeVector, TallyCountsCumulativeView) {
  const EventDataset ds = hand_dataset();
  const auto buckets = bucketize(ds, 2.0);
  RecordLabels labels;
  labels.blogs = {SentimentClass::Positive, SentimentClass::Negative, SentimentClass::Negative,
                  SentimentClass::Neutral,  SentimentClass::Positive, SentimentClass::Negative};
  labels.comments = {SentimentClass::Neutral, SentimentClass::Negative};
  EXPECT_EQ(tally(buckets[0], labels), (SentimentCounts{1, 2, 1}));
  EXPECT_EQ(tally(buckets[1], labels), (SentimentCounts{2, 4, 2}));
}

TEST(ComputeVector, MatchesGeneratorManifest) {
  const auto result = synth::generate({});
  const auto buckets = bucketize(result.dataset, result.manifest.window_hours);
  ASSERT_EQ(buckets.size(), result.manifest.bucket_count);
  const auto catalog = IndicatorCatalog::parse("C113,C121,C122,C123,C124,C125,C126,C211,C212,C221,C222,C223,C224");
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const auto& m = result.manifest.buckets[i];
    const TimeBucket* prev = i == 0 ? nullptr : &buckets[i - 1];
    const auto v = compute_vector(buckets[i], prev, catalog, std::nullopt);
    EXPECT_EQ(static_cast<Timestamp>(buckets[i].end), m.end);
    EXPECT_DOUBLE_EQ(*v.get("C113"), static_cast<double>(m.verified_authors));
    EXPECT_DOUBLE_EQ(*v.get("C121"), static_cast<double>(m.likes));
    EXPECT_DOUBLE_EQ(*v.get("C122"), static_cast<double>(m.comments));
    EXPECT_DOUBLE_EQ(*v.get("C123"), static_cast<double>(m.forwards));
    EXPECT_DOUBLE_EQ(*v.get("C124"), static_cast<double>(m.blogs));
    EXPECT_DOUBLE_EQ(*v.get("C125"), static_cast<double>(m.government_blogs));
    EXPECT_DOUBLE_EQ(*v.get("C126"), static_cast<double>(m.responses));
    EXPECT_DOUBLE_EQ(*v.get("C211"), static_cast<double>(m.reads));
    EXPECT_DOUBLE_EQ(*v.get("C212"), static_cast<double>(m.discussions));
    EXPECT_EQ(buckets[i].comments.size(), m.comment_records);
    if (i > 0) {
      const auto& p = result.manifest.buckets[i - 1];
      const double h = result.manifest.window_hours;
      EXPECT_NEAR(*v.get("C221"), (static_cast<double>(m.blogs) - static_cast<double>(p.blogs)) / h, 1e-12);
      EXPECT_NEAR(*v.get("C224"), (static_cast<double>(m.likes) - static_cast<double>(p.likes)) / h, 1e-12);
    }
  }
}

TEST(ComputeVector, BundledManifestAgrees) {
  const auto manifest = synth::read_manifest(testing_support::data_dir() / "synthetic_event.manifest.json");
  const auto generated = synth::generate({}).manifest;
  ASSERT_EQ(manifest.buckets.size(), generated.buckets.size());
  EXPECT_EQ(manifest.bucket_count, 24u);
  for (std::size_t i = 0; i < manifest.buckets.size(); ++i) {
    EXPECT_EQ(manifest.buckets[i].blogs, generated.buckets[i].blogs);
    EXPECT_EQ(manifest.buckets[i].reads, generated.buckets[i].reads);
    EXPECT_EQ(manifest.buckets[i].negative, generated.buckets[i].negative);
  }
}

TEST(IndicatorMatrix, ExcludesIncompleteRows) {
  const auto catalog = IndicatorCatalog::parse("C121,C221");
  IndicatorVector a(1, catalog.codes());
  a.set("C121", 5);
  a.set("C221", 1);
  IndicatorVector b(0, catalog.codes());
  b.set("C121", 3);
  IndicatorVector c(2, catalog.codes());
  c.set("C121", 9);
  c.set("C221", 2);
  const std::vector<IndicatorVector> vectors{a, b, c};
  const auto m = build_matrix(vectors, catalog);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.bucket_indices, (std::vector<std::size_t>{1, 2}));
  EXPECT_DOUBLE_EQ(m.values(1, 0), 9);
  EXPECT_EQ(m.exclusions.size(), 1u);
  EXPECT_EQ(*m.column("C221"), 1u);

  const std::vector<IndicatorVector> only_b{b};
  try {
    build_matrix(only_b, catalog);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoCompleteRows);
  }
}

TEST(IndicatorCsv, RoundTripKeepsMissingCells) {
  TempDir dir;
  const auto catalog = IndicatorCatalog::parse("C121,C221");
  IndicatorVector a(0, catalog.codes());
  a.set("C121", 0.1);
  IndicatorVector b(1, catalog.codes());
  b.set("C121", 1e9);
  b.set("C221", -2.75);
  const std::vector<IndicatorVector> vectors{a, b};
  write_indicator_csv(vectors, dir / "ind.csv");
  EXPECT_EQ(testing_support::read_file(dir / "ind.csv"), "bucket,C121,C221\n0,0.1,\n1,1e+09,-2.75\n");
  EXPECT_EQ(read_indicator_csv(dir / "ind.csv"), vectors);
}
