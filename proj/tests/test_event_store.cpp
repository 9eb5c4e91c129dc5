#include <gtest/gtest.h>

#include <sstream>

#include "crisis/error.hpp"
#include "crisis/event_store.hpp"
#include "crisis/synth.hpp"
#include "support.hpp"

using namespace crisis;
using testing_support::TempDir;

namespace {

const char* kHeader = R"({"kind":"event","id":"ev","start":1000})";

std::string blog_line(const std::string& id, Timestamp ts, const std::string& extra = "") {
  return R"({"kind":"blog","id":")" + id + R"(","ts":)" + std::to_string(ts) +
         R"(,"text":"hello","likes":3,"comments":1,"forwards":2,"original":true,"government":false,)"
         R"("author":{"followers":10,"attentions":5,"grade":2,"verified":false,"historical_blogs":7})" + extra +
         "}";
}

LoadResult parse(const std::string& text, LoadPolicy policy = LoadPolicy::Strict) {
  std::istringstream in(text);
  return parse_records(in, "default-id", policy);
}

}  // namespace

TEST(EventStore, ParsesAllRecordKinds) {
  const std::string text = std::string(kHeader) + "\n" + blog_line("b1", 1100) + "\n" +
                           R"({"kind":"comment","id":"c1","blog_id":"b1","ts":1200,"text":"ok","responses":4})" +
                           "\n" + R"({"kind":"snapshot","ts":1300,"reads":50,"discussions":6})" + "\n";
  const LoadResult r = parse(text);
  EXPECT_EQ(r.dataset.event_id, "ev");
  EXPECT_EQ(r.dataset.start_time, 1000);
  ASSERT_EQ(r.dataset.blogs.size(), 1u);
  EXPECT_EQ(r.dataset.blogs[0].like_count, 3u);
  EXPECT_EQ(r.dataset.blogs[0].author.historical_blog_count, 7u);
  ASSERT_EQ(r.dataset.comments.size(), 1u);
  EXPECT_EQ(r.dataset.comments[0].response_count, 4u);
  ASSERT_EQ(r.dataset.snapshots.size(), 1u);
  EXPECT_EQ(r.dataset.snapshots[0].total_reads, 50u);
  EXPECT_EQ(r.total_lines, 4u);
  EXPECT_EQ(r.valid_lines, 4u);
  EXPECT_TRUE(validate(r.dataset).ok());
}

TEST(EventStore, WithoutHeaderStartIsEarliestRecord) {
  const LoadResult r = parse(blog_line("b2", 2000) + "\n" + blog_line("b1", 1500) + "\n");
  EXPECT_EQ(r.dataset.event_id, "default-id");
  EXPECT_EQ(r.dataset.start_time, 1500);
  EXPECT_EQ(r.dataset.blogs[0].id, "b1");
}

TEST(EventStore, StrictModeRejectsFirstBadLine) {
  const std::string text = std::string(kHeader) + "\n" + blog_line("b1", 1100) + "\nnot json\n";
  try {
    parse(text);
    FAIL() << "expected SchemaViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(EventStore, LenientModeReportsRejections) {
  const std::string text =
      std::string(kHeader) + "\n" + blog_line("b1", 1100) + "\n" + blog_line("b1", 1150) + "\n" +
      R"({"kind":"comment","id":"c1","blog_id":"zzz","ts":1200,"text":"ok","responses":0})" + "\n" +
      R"({"kind":"blog","id":"b3","ts":1100})" + "\n" + blog_line("b4", 900) + "\n" +
      R"({"kind":"snapshot","ts":1300,"reads":50,"discussions":6})" + "\n" +
      R"({"kind":"snapshot","ts":1400,"reads":40,"discussions":6})" + "\n" + R"({"kind":"alien"})" + "\n";
  const LoadResult r = parse(text, LoadPolicy::Lenient);
  ASSERT_EQ(r.rejections.size(), 6u);
  EXPECT_EQ(r.rejections[0].line, 3u);
  EXPECT_NE(r.rejections[0].reason.find("duplicate"), std::string::npos);
  EXPECT_NE(r.rejections[1].reason.find("unknown parent"), std::string::npos);
  EXPECT_NE(r.rejections[2].reason.find("missing field"), std::string::npos);
  EXPECT_NE(r.rejections[3].reason.find("before event start"), std::string::npos);
  EXPECT_NE(r.rejections[4].reason.find("decrease"), std::string::npos);
  EXPECT_NE(r.rejections[5].reason.find("unknown kind"), std::string::npos);
  EXPECT_EQ(r.dataset.blogs.size(), 1u);
  EXPECT_EQ(r.valid_lines, 3u);
  EXPECT_TRUE(validate(r.dataset).ok());
  EXPECT_NE(format_rejections(r.rejections).find("line 3: "), std::string::npos);
}

TEST(EventStore, RejectsNegativeCountsAndBadGrade) {
  const LoadResult r = parse(std::string(kHeader) + "\n" + blog_line("b1", 1100) + "\n" +
                                 R"({"kind":"blog","id":"b2","ts":1100,"text":"x","likes":-1,"comments":0,)"
                                 R"("forwards":0,"original":true,"government":false,"author":{"followers":1,)"
                                 R"("attentions":1,"grade":1,"verified":false,"historical_blogs":1}})" + "\n" +
                                 R"({"kind":"blog","id":"b3","ts":1100,"text":"x","likes":1,"comments":0,)"
                                 R"("forwards":0,"original":true,"government":false,"author":{"followers":1,)"
                                 R"("attentions":1,"grade":0,"verified":false,"historical_blogs":1}})" + "\n",
                             LoadPolicy::Lenient);
  ASSERT_EQ(r.rejections.size(), 2u);
  EXPECT_NE(r.rejections[0].reason.find("likes"), std::string::npos);
  EXPECT_NE(r.rejections[1].reason.find("grade"), std::string::npos);
}

TEST(EventStore, NoBlogsIsEmptyDataset) {
  try {
    parse(std::string(kHeader) + "\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
}

TEST(EventStore, MissingFileIsUnreadable) {
  try {
    load_records("/nonexistent/records.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FileUnreadable);
    EXPECT_EQ(exit_code_for(e.code()), 1);
  }
}

TEST(EventStore, ValidateFlagsEveryKind) {
  EventDataset ds;
  ds.start_time = 100;
  ds.blogs = {testing_support::blog("b1", 200), testing_support::blog("b1", 150), testing_support::blog("b2", 50)};
  ds.blogs[2].author.grade = 0;
  ds.comments = {testing_support::comment("c1", "nope", 300)};
  ds.snapshots = {testing_support::snapshot(400, 10, 10), testing_support::snapshot(400, 5, 10)};
  const ValidationReport report = validate(ds);
  EXPECT_FALSE(report.ok());
  EXPECT_EQ(report.count(FindingKind::DuplicateId), 1u);
  EXPECT_EQ(report.count(FindingKind::DanglingReference), 1u);
  EXPECT_EQ(report.count(FindingKind::OutOfRange), 1u);
  EXPECT_EQ(report.count(FindingKind::InvalidGrade), 1u);
  EXPECT_EQ(report.count(FindingKind::NonMonotoneSnapshot), 2u);
  EXPECT_EQ(report.count(FindingKind::Unordered), 1u);
}

TEST(EventStore, BucketsAreHalfOpenAndCumulative) {
  EventDataset ds;
  ds.event_id = "ev";
  ds.start_time = 0;
  ds.blogs = {testing_support::blog("a", 0), testing_support::blog("b", 7199), testing_support::blog("c", 7200),
              testing_support::blog("d", 14400)};
  ds.comments = {testing_support::comment("x", "a", 7200)};
  ds.snapshots = {testing_support::snapshot(3600, 5, 1), testing_support::snapshot(10800, 9, 2)};
  const auto buckets = bucketize(ds, 2.0);
  ASSERT_EQ(buckets.size(), 3u);
  EXPECT_EQ(buckets[0].blogs.size(), 2u);
  EXPECT_EQ(buckets[0].comments.size(), 0u);
  EXPECT_EQ(buckets[1].blogs.size(), 3u);
  EXPECT_EQ(buckets[1].comments.size(), 1u);
  EXPECT_EQ(buckets[2].blogs.size(), 4u);
  EXPECT_DOUBLE_EQ(buckets[1].start, 7200);
  EXPECT_DOUBLE_EQ(buckets[1].end, 14400);
  EXPECT_DOUBLE_EQ(buckets[1].width_hours(), 2.0);
  ASSERT_TRUE(buckets[0].snapshot_at_end);
  EXPECT_EQ(buckets[0].snapshot_at_end->total_reads, 5u);
  EXPECT_EQ(buckets[1].snapshot_at_end->total_reads, 9u);

  const TimeBucket origin = origin_bucket(ds);
  EXPECT_EQ(origin.blogs.size(), 0u);
  EXPECT_FALSE(origin.snapshot_at_end);
}

TEST(EventStore, BucketSizesAreMonotone) {
  const auto result = synth::generate({});
  const auto buckets = bucketize(result.dataset, 1.5);
  for (std::size_t i = 1; i < buckets.size(); ++i) {
    EXPECT_GE(buckets[i].blogs.size(), buckets[i - 1].blogs.size());
    EXPECT_GE(buckets[i].comments.size(), buckets[i - 1].comments.size());
  }
}

TEST(EventStore, RejectsBadWindow) {
  EventDataset ds;
  ds.blogs = {testing_support::blog("a", 0)};
  for (double w : {0.0, -1.0}) {
    try {
      bucketize(ds, w);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidWindow);
    }
  }
}

TEST(EventStore, SaveLoadRoundTrip) {
  TempDir dir;
  const auto original = synth::generate({}).dataset;
  save_records(original, dir / "records.jsonl");
  const LoadResult loaded = load_records(dir / "records.jsonl");
  EXPECT_TRUE(loaded.rejections.empty());
  EXPECT_EQ(loaded.dataset, original);
}

TEST(EventStore, BundledCorpusLoadsCleanly) {
  const LoadResult r = load_records(testing_support::data_dir() / "synthetic_event.jsonl");
  EXPECT_TRUE(r.rejections.empty());
  EXPECT_TRUE(validate(r.dataset).ok());
  EXPECT_EQ(bucketize(r.dataset, 2.0).size(), 24u);
}

TEST(EventStore, BundledCorpusMatchesGenerator) {
  const LoadResult r = load_records(testing_support::data_dir() / "synthetic_event.jsonl");
  EXPECT_EQ(r.dataset, synth::generate({}).dataset);
}
