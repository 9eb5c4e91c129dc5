#include "crisis/event_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "crisis/error.hpp"

namespace crisis {

using nlohmann::json;

namespace {

struct FieldError {
  std::string reason;
};

const json& require(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw FieldError{std::string("missing field '") + field + "'"};
  return *it;
}

std::string get_string(const json& obj, const char* field) {
  const json& v = require(obj, field);
  if (!v.is_string()) throw FieldError{std::string("field '") + field + "' must be a string"};
  return v.get<std::string>();
}

std::uint64_t get_count(const json& obj, const char* field) {
  const json& v = require(obj, field);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  throw FieldError{std::string("field '") + field + "' must be a non-negative integer"};
}

Timestamp get_timestamp(const json& obj, const char* field) {
  const json& v = require(obj, field);
  if (!v.is_number_integer()) throw FieldError{std::string("field '") + field + "' must be integer UTC seconds"};
  return v.get<Timestamp>();
}

bool get_bool(const json& obj, const char* field) {
  const json& v = require(obj, field);
  if (!v.is_boolean()) throw FieldError{std::string("field '") + field + "' must be a boolean"};
  return v.get<bool>();
}

AuthorProfile parse_author(const json& obj) {
  const json& a = require(obj, "author");
  if (!a.is_object()) throw FieldError{"field 'author' must be an object"};
  AuthorProfile p;
  try {
    if (a.contains("id")) p.id = get_string(a, "id");
    p.follower_count = get_count(a, "followers");
    p.attention_count = get_count(a, "attentions");
    const std::uint64_t grade = get_count(a, "grade");
    if (grade < 1 || grade > 0xFFFFFFFFu) throw FieldError{"field 'grade' must be a positive integer"};
    p.grade = static_cast<std::uint32_t>(grade);
    p.is_verified = get_bool(a, "verified");
    p.historical_blog_count = get_count(a, "historical_blogs");
  } catch (const FieldError& e) {
    throw FieldError{"author: " + e.reason};
  }
  return p;
}

BlogRecord parse_blog(const json& obj) {
  BlogRecord b;
  b.id = get_string(obj, "id");
  b.author = parse_author(obj);
  b.timestamp = get_timestamp(obj, "ts");
  b.text = get_string(obj, "text");
  b.like_count = get_count(obj, "likes");
  b.comment_count = get_count(obj, "comments");
  b.forward_count = get_count(obj, "forwards");
  b.is_original = get_bool(obj, "original");
  b.is_government = get_bool(obj, "government");
  return b;
}

CommentRecord parse_comment(const json& obj) {
  CommentRecord c;
  c.id = get_string(obj, "id");
  c.parent_blog_id = get_string(obj, "blog_id");
  c.timestamp = get_timestamp(obj, "ts");
  c.text = get_string(obj, "text");
  c.response_count = get_count(obj, "responses");
  return c;
}

SnapshotStats parse_snapshot(const json& obj) {
  SnapshotStats s;
  s.timestamp = get_timestamp(obj, "ts");
  s.total_reads = get_count(obj, "reads");
  s.total_discussions = get_count(obj, "discussions");
  return s;
}

template <typename T>
struct Numbered {
  std::size_t line;
  T value;
};

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

template <typename T>
bool by_time_then_id(const T& a, const T& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.id < b.id;
}

}  // namespace

LoadResult parse_records(std::istream& in, const std::string& default_event_id, LoadPolicy policy) {
  LoadResult result;
  std::vector<Numbered<BlogRecord>> blogs;
  std::vector<Numbered<CommentRecord>> comments;
  std::vector<Numbered<SnapshotStats>> snapshots;
  std::optional<std::pair<std::string, Timestamp>> header;

  auto reject = [&](std::size_t line, std::string reason) {
    result.rejections.push_back({line, std::move(reason)});
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (is_blank(raw)) continue;
    ++result.total_lines;

    json obj = json::parse(raw, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      reject(line_no, "not a JSON object");
      continue;
    }
    try {
      const std::string kind = get_string(obj, "kind");
      if (kind == "blog") {
        blogs.push_back({line_no, parse_blog(obj)});
      } else if (kind == "comment") {
        comments.push_back({line_no, parse_comment(obj)});
      } else if (kind == "snapshot") {
        snapshots.push_back({line_no, parse_snapshot(obj)});
      } else if (kind == "event") {
        if (header) {
          reject(line_no, "duplicate event header");
          continue;
        }
        header.emplace(get_string(obj, "id"), get_timestamp(obj, "start"));
      } else {
        reject(line_no, "unknown kind '" + kind + "'");
      }
    } catch (const FieldError& e) {
      reject(line_no, e.reason);
    }
  }

  EventDataset& ds = result.dataset;
  std::optional<Timestamp> start;
  if (header) {
    ds.event_id = header->first;
    start = header->second;
  } else {
    ds.event_id = default_event_id;
  }

  auto before_start = [&](Timestamp ts) { return start && ts < *start; };

  std::unordered_set<std::string> blog_ids;
  for (auto& [line, blog] : blogs) {
    if (before_start(blog.timestamp)) {
      reject(line, "timestamp before event start");
    } else if (!blog_ids.insert(blog.id).second) {
      reject(line, "duplicate blog id '" + blog.id + "'");
    } else {
      ds.blogs.push_back(std::move(blog));
    }
  }

  std::unordered_set<std::string> comment_ids;
  for (auto& [line, comment] : comments) {
    if (before_start(comment.timestamp)) {
      reject(line, "timestamp before event start");
    } else if (!blog_ids.contains(comment.parent_blog_id)) {
      reject(line, "unknown parent blog '" + comment.parent_blog_id + "'");
    } else if (!comment_ids.insert(comment.id).second) {
      reject(line, "duplicate comment id '" + comment.id + "'");
    } else {
      ds.comments.push_back(std::move(comment));
    }
  }

  std::stable_sort(snapshots.begin(), snapshots.end(),
                   [](const auto& a, const auto& b) { return a.value.timestamp < b.value.timestamp; });
  for (auto& [line, snap] : snapshots) {
    if (before_start(snap.timestamp)) {
      reject(line, "timestamp before event start");
      continue;
    }
    if (!ds.snapshots.empty()) {
      const SnapshotStats& prev = ds.snapshots.back();
      if (snap.timestamp <= prev.timestamp) {
        reject(line, "snapshot timestamp not strictly increasing");
        continue;
      }
      if (snap.total_reads < prev.total_reads || snap.total_discussions < prev.total_discussions) {
        reject(line, "snapshot totals decrease");
        continue;
      }
    }
    ds.snapshots.push_back(snap);
  }

  if (start) {
    ds.start_time = *start;
  } else {
    std::optional<Timestamp> earliest;
    auto see = [&](Timestamp ts) { earliest = earliest ? std::min(*earliest, ts) : ts; };
    for (const auto& b : ds.blogs) see(b.timestamp);
    for (const auto& c : ds.comments) see(c.timestamp);
    for (const auto& s : ds.snapshots) see(s.timestamp);
    ds.start_time = earliest.value_or(0);
  }

  sort_records(ds);
  std::sort(result.rejections.begin(), result.rejections.end(),
            [](const Rejection& a, const Rejection& b) { return a.line < b.line; });
  result.valid_lines = result.total_lines - result.rejections.size();

  if (policy == LoadPolicy::Strict && !result.rejections.empty()) {
    const Rejection& first = result.rejections.front();
    std::ostringstream msg;
    msg << "line " << first.line << ": " << first.reason;
    if (result.rejections.size() > 1) msg << " (" << result.rejections.size() - 1 << " more rejected lines)";
    throw Error(ErrorCode::SchemaViolation, msg.str());
  }
  if (ds.blogs.empty()) throw Error(ErrorCode::EmptyDataset, "no valid blog records");
  return result;
}

LoadResult load_records(const std::filesystem::path& path, LoadPolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open '" + path.string() + "'");
  try {
    return parse_records(in, path.stem().string(), policy);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaViolation || e.code() == ErrorCode::EmptyDataset)
      throw Error(e.code(), path.string() + ": " + e.detail());
    throw;
  }
}

void write_records(const EventDataset& ds, std::ostream& out) {
  out << json{{"kind", "event"}, {"id", ds.event_id}, {"start", ds.start_time}}.dump() << '\n';
  for (const auto& b : ds.blogs) {
    json author = {{"followers", b.author.follower_count},
                   {"attentions", b.author.attention_count},
                   {"grade", b.author.grade},
                   {"verified", b.author.is_verified},
                   {"historical_blogs", b.author.historical_blog_count}};
    if (!b.author.id.empty()) author["id"] = b.author.id;
    json j = {{"kind", "blog"},      {"id", b.id},
              {"author", author},    {"ts", b.timestamp},
              {"text", b.text},      {"likes", b.like_count},
              {"comments", b.comment_count}, {"forwards", b.forward_count},
              {"original", b.is_original},   {"government", b.is_government}};
    out << j.dump() << '\n';
  }
  for (const auto& c : ds.comments) {
    json j = {{"kind", "comment"}, {"id", c.id},     {"blog_id", c.parent_blog_id},
              {"ts", c.timestamp}, {"text", c.text}, {"responses", c.response_count}};
    out << j.dump() << '\n';
  }
  for (const auto& s : ds.snapshots) {
    json j = {{"kind", "snapshot"}, {"ts", s.timestamp},
              {"reads", s.total_reads}, {"discussions", s.total_discussions}};
    out << j.dump() << '\n';
  }
}

void save_records(const EventDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write '" + path.string() + "'");
  write_records(dataset, out);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "write failed for '" + path.string() + "'");
}

std::string format_rejections(const std::vector<Rejection>& rejections) {
  std::string out;
  for (const auto& r : rejections) out += "line " + std::to_string(r.line) + ": " + r.reason + "\n";
  return out;
}

void sort_records(EventDataset& ds) {
  std::stable_sort(ds.blogs.begin(), ds.blogs.end(), by_time_then_id<BlogRecord>);
  std::stable_sort(ds.comments.begin(), ds.comments.end(), by_time_then_id<CommentRecord>);
  std::stable_sort(ds.snapshots.begin(), ds.snapshots.end(),
                   [](const SnapshotStats& a, const SnapshotStats& b) { return a.timestamp < b.timestamp; });
}

std::size_t ValidationReport::count(FindingKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [kind](const Finding& f) { return f.kind == kind; }));
}

ValidationReport validate(const EventDataset& ds) {
  ValidationReport report;
  auto add = [&](FindingKind kind, std::string msg) { report.findings.push_back({kind, std::move(msg)}); };

  std::set<std::string> blog_ids;
  for (const auto& b : ds.blogs) {
    if (!blog_ids.insert(b.id).second) add(FindingKind::DuplicateId, "duplicate blog id '" + b.id + "'");
    if (b.timestamp < ds.start_time)
      add(FindingKind::OutOfRange, "blog '" + b.id + "' precedes event start");
    if (b.author.grade < 1) add(FindingKind::InvalidGrade, "blog '" + b.id + "' author grade < 1");
  }
  std::set<std::string> comment_ids;
  for (const auto& c : ds.comments) {
    if (!comment_ids.insert(c.id).second) add(FindingKind::DuplicateId, "duplicate comment id '" + c.id + "'");
    if (!blog_ids.contains(c.parent_blog_id))
      add(FindingKind::DanglingReference,
          "comment '" + c.id + "' refers to missing blog '" + c.parent_blog_id + "'");
    if (c.timestamp < ds.start_time)
      add(FindingKind::OutOfRange, "comment '" + c.id + "' precedes event start");
  }
  for (std::size_t i = 0; i < ds.snapshots.size(); ++i) {
    const auto& s = ds.snapshots[i];
    if (s.timestamp < ds.start_time)
      add(FindingKind::OutOfRange, "snapshot at " + std::to_string(s.timestamp) + " precedes event start");
    if (i == 0) continue;
    const auto& p = ds.snapshots[i - 1];
    if (s.timestamp <= p.timestamp)
      add(FindingKind::NonMonotoneSnapshot,
          "snapshot at " + std::to_string(s.timestamp) + " does not follow " + std::to_string(p.timestamp));
    if (s.total_reads < p.total_reads || s.total_discussions < p.total_discussions)
      add(FindingKind::NonMonotoneSnapshot, "snapshot totals decrease at " + std::to_string(s.timestamp));
  }
  if (!std::is_sorted(ds.blogs.begin(), ds.blogs.end(), by_time_then_id<BlogRecord>) ||
      !std::is_sorted(ds.comments.begin(), ds.comments.end(), by_time_then_id<CommentRecord>))
    add(FindingKind::Unordered, "records are not in timestamp order");
  return report;
}

namespace {

template <typename T>
std::size_t count_before(const std::vector<T>& records, double end) {
  auto it = std::partition_point(records.begin(), records.end(),
                                 [end](const T& r) { return static_cast<double>(r.timestamp) < end; });
  return static_cast<std::size_t>(it - records.begin());
}

TimeBucket make_bucket(const EventDataset& ds, std::size_t index, double start, double end) {
  TimeBucket b;
  b.index = index;
  b.start = start;
  b.end = end;
  b.blogs = std::span<const BlogRecord>(ds.blogs.data(), count_before(ds.blogs, end));
  b.comments = std::span<const CommentRecord>(ds.comments.data(), count_before(ds.comments, end));
  const std::size_t snaps = count_before(ds.snapshots, end);
  if (snaps > 0) b.snapshot_at_end = ds.snapshots[snaps - 1];
  return b;
}

}  // namespace

std::vector<TimeBucket> bucketize(const EventDataset& ds, double window_hours) {
  if (!(window_hours > 0) || !std::isfinite(window_hours))
    throw Error(ErrorCode::InvalidWindow, "window_hours must be positive");
  if (ds.blogs.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no blogs");
  const auto report = validate(ds);
  if (report.count(FindingKind::Unordered) > 0)
    throw Error(ErrorCode::InvalidArgument, "dataset records are not sorted; call sort_records first");

  Timestamp last = ds.start_time;
  for (const auto& b : ds.blogs) last = std::max(last, b.timestamp);
  for (const auto& c : ds.comments) last = std::max(last, c.timestamp);
  for (const auto& s : ds.snapshots) last = std::max(last, s.timestamp);

  const double width = window_hours * 3600.0;
  const double span = static_cast<double>(last - ds.start_time);
  const auto count = static_cast<std::size_t>(std::floor(span / width)) + 1;

  std::vector<TimeBucket> buckets;
  buckets.reserve(count);
  const double origin = static_cast<double>(ds.start_time);
  for (std::size_t i = 0; i < count; ++i) {
    buckets.push_back(make_bucket(ds, i, origin + static_cast<double>(i) * width,
                                  origin + static_cast<double>(i + 1) * width));
  }
  return buckets;
}

TimeBucket origin_bucket(const EventDataset& ds) {
  const double origin = static_cast<double>(ds.start_time);
  return make_bucket(ds, 0, origin, origin);
}

}  // namespace crisis
