#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crisis {

// UTC seconds since the epoch.
using Timestamp = std::int64_t;

struct AuthorProfile {
  std::string id;  // optional; empty means "unknown", each blog then counts as its own author
  std::uint64_t follower_count = 0;
  std::uint64_t attention_count = 0;
  std::uint32_t grade = 1;
  bool is_verified = false;
  std::uint64_t historical_blog_count = 0;

  bool operator==(const AuthorProfile&) const = default;
};

struct BlogRecord {
  std::string id;
  AuthorProfile author;
  Timestamp timestamp = 0;
  std::string text;
  std::uint64_t like_count = 0;
  std::uint64_t comment_count = 0;
  std::uint64_t forward_count = 0;
  bool is_original = true;
  bool is_government = false;

  bool operator==(const BlogRecord&) const = default;
};

struct CommentRecord {
  std::string id;
  std::string parent_blog_id;
  Timestamp timestamp = 0;
  std::string text;
  std::uint64_t response_count = 0;

  bool operator==(const CommentRecord&) const = default;
};

// Platform-reported running totals; not derivable from individual records.
struct SnapshotStats {
  Timestamp timestamp = 0;
  std::uint64_t total_reads = 0;
  std::uint64_t total_discussions = 0;

  bool operator==(const SnapshotStats&) const = default;
};

// All records of one event. Loaders keep blogs, comments and snapshots sorted
// by (timestamp, id) so that a prefix of each list is a cumulative view.
struct EventDataset {
  std::string event_id;
  std::vector<BlogRecord> blogs;
  std::vector<CommentRecord> comments;
  std::vector<SnapshotStats> snapshots;
  Timestamp start_time = 0;

  bool operator==(const EventDataset&) const = default;
};

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

struct LoadResult {
  EventDataset dataset;
  std::vector<Rejection> rejections;
  std::size_t total_lines = 0;
  std::size_t valid_lines = 0;
};

enum class LoadPolicy {
  Strict,   // first rejected line raises SchemaViolation
  Lenient,  // rejected lines are reported, the rest is kept
};

LoadResult load_records(const std::filesystem::path& path, LoadPolicy policy = LoadPolicy::Strict);
LoadResult parse_records(std::istream& in, const std::string& default_event_id,
                         LoadPolicy policy = LoadPolicy::Strict);

void save_records(const EventDataset& dataset, const std::filesystem::path& path);
void write_records(const EventDataset& dataset, std::ostream& out);

// "line <n>: <reason>" per rejection.
std::string format_rejections(const std::vector<Rejection>& rejections);

// Puts every list into (timestamp, id) order.
void sort_records(EventDataset& dataset);

enum class FindingKind {
  DanglingReference,
  DuplicateId,
  OutOfRange,
  NonMonotoneSnapshot,
  InvalidGrade,
  Unordered,
};

struct Finding {
  FindingKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  std::size_t count(FindingKind kind) const;
};

ValidationReport validate(const EventDataset& dataset);

// Half-open window [start, end) in UTC seconds. The record spans are prefixes
// of the owning dataset (everything strictly before `end`), so a bucket must
// not outlive the dataset it was cut from.
struct TimeBucket {
  std::size_t index = 0;
  double start = 0;
  double end = 0;
  std::span<const BlogRecord> blogs;
  std::span<const CommentRecord> comments;
  std::optional<SnapshotStats> snapshot_at_end;

  double width_hours() const { return (end - start) / 3600.0; }
};

std::vector<TimeBucket> bucketize(const EventDataset& dataset, double window_hours);

// Zero-width bucket ending at the event start: the empty state before any
// record exists. Usable as the predecessor of bucket 0.
TimeBucket origin_bucket(const EventDataset& dataset);

// Source of raw page bytes for a live collector. No site driver ships with the
// library; record files are the supported ingestion path.
class PageFetcher {
 public:
  virtual ~PageFetcher() = default;
  virtual std::string fetch(std::string_view page_address) = 0;
};

}  // namespace crisis
