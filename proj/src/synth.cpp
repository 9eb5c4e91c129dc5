#include "crisis/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "crisis/error.hpp"

namespace crisis::synth {

namespace {

using json = nlohmann::json;

const std::vector<std::string> kPositiveWords = {"great", "good", "thank", "glad", "proud", "appreciate", "well",
                                                 "done", "fair", "transparent", "support", "justice", "honest",
                                                 "safe", "quick"};
const std::vector<std::string> kNegativeWords = {"outrageous", "angry", "shameful", "terrible", "disgusting",
                                                 "furious", "lied", "lie", "corrupt", "unacceptable", "violence",
                                                 "abuse", "cover", "resign", "demand"};
const std::vector<std::string> kNeutralWords = {"statement", "released", "reports", "scheduled", "conference",
                                                "details", "published", "officials", "spokesperson", "confirmed",
                                                "timeline", "video", "hearing", "media", "tomorrow"};
const std::vector<std::string> kFiller = {"the", "police", "case", "officers", "city", "event", "today", "about"};

template <typename T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

std::string make_text(int cls, std::mt19937_64& rng) {
  const auto& words = cls == 0 ? kPositiveWords : cls == 1 ? kNegativeWords : kNeutralWords;
  std::uniform_int_distribution<int> count(2, 3);
  std::vector<std::string> parts;
  const int own = count(rng);
  const int filler = count(rng);
  for (int i = 0; i < own; ++i) parts.push_back(pick(words, rng));
  for (int i = 0; i < filler; ++i) parts.push_back(pick(kFiller, rng));
  std::shuffle(parts.begin(), parts.end(), rng);
  std::string text;
  for (const auto& p : parts) text += (text.empty() ? "" : " ") + p;
  return text;
}

// Escalation intensity in [0, 1] at `hour`.
double intensity(const SynthConfig& c, double hour) {
  const double z = (hour - c.peak_hour) / 8.0;
  return std::exp(-z * z);
}

int draw_class(double e, std::mt19937_64& rng) {
  std::discrete_distribution<int> d({0.35 - 0.2 * e, 0.25 + 0.4 * e, 0.40 - 0.2 * e});
  return d(rng);
}

std::uint64_t poisson(double mean, std::mt19937_64& rng) {
  if (mean <= 0) return 0;
  std::poisson_distribution<std::uint64_t> d(mean);
  return d(rng);
}

std::string padded(char prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%06zu", prefix, n);
  return buf;
}

}  // namespace

SynthResult generate(const SynthConfig& c) {
  if (!(c.hours > 0) || !(c.snapshot_minutes > 0) || !(c.manifest_window_hours > 0) || c.authors == 0)
    throw Error(ErrorCode::InvalidArgument, "synthetic corpus parameters must be positive");

  std::mt19937_64 rng(c.seed);
  SynthResult out;
  EventDataset& ds = out.dataset;
  ds.event_id = c.event_id;
  ds.start_time = c.start;

  const auto horizon = static_cast<Timestamp>(std::llround(c.hours * 3600.0));
  const auto window = static_cast<Timestamp>(std::llround(c.manifest_window_hours * 3600.0));
  const auto bucket_count = static_cast<std::size_t>((horizon - 1) / window) + 1;
  std::vector<ManifestBucket> inc(bucket_count);
  auto bucket_of = [&](Timestamp ts) { return static_cast<std::size_t>((ts - c.start) / window); };

  std::vector<AuthorProfile> authors;
  {
    std::uniform_int_distribution<std::uint64_t> followers(10, 200000);
    std::uniform_int_distribution<std::uint64_t> attentions(5, 2000);
    std::uniform_int_distribution<std::uint32_t> grade(1, 6);
    std::uniform_int_distribution<std::uint64_t> history(1, 5000);
    std::bernoulli_distribution verified(0.15);
    for (std::size_t i = 0; i < c.authors; ++i) {
      AuthorProfile a;
      a.id = padded('u', i + 1);
      a.follower_count = followers(rng);
      a.attention_count = attentions(rng);
      a.grade = grade(rng);
      a.is_verified = verified(rng);
      a.historical_blog_count = history(rng);
      authors.push_back(a);
    }
  }

  constexpr Timestamp kStep = 600;
  std::bernoulli_distribution original(0.75);
  std::bernoulli_distribution government(0.05);
  std::set<std::string> verified_seen;
  std::size_t comment_serial = 0;
  for (Timestamp t0 = 0; t0 < horizon; t0 += kStep) {
    const double hour = static_cast<double>(t0) / 3600.0;
    const double e = intensity(c, hour);
    const double rate = c.base_blogs_per_hour + c.peak_blogs_per_hour * e;
    const std::uint64_t n = poisson(rate * static_cast<double>(kStep) / 3600.0, rng);
    std::uniform_int_distribution<Timestamp> offset(0, std::min(kStep, horizon - t0) - 1);
    for (std::uint64_t j = 0; j < n; ++j) {
      BlogRecord b;
      b.id = padded('b', ds.blogs.size() + 1);
      b.author = pick(authors, rng);
      b.timestamp = c.start + t0 + offset(rng);
      const int cls = draw_class(e, rng);
      b.text = make_text(cls, rng);
      b.like_count = poisson(15.0 * (1 + 3 * e), rng);
      b.comment_count = poisson(4.0 * (1 + 2 * e), rng);
      b.forward_count = poisson(6.0 * (1 + 3 * e), rng);
      b.is_original = original(rng);
      b.is_government = b.is_original && government(rng);

      ManifestBucket& m = inc[bucket_of(b.timestamp)];
      ++m.blogs;
      m.likes += b.like_count;
      m.comments += b.comment_count;
      m.forwards += b.forward_count;
      if (b.is_original) ++m.original_blogs;
      if (b.is_government) ++m.government_blogs;
      if (b.is_original && b.author.is_verified && verified_seen.insert(b.author.id).second) ++m.verified_authors;
      (cls == 0 ? m.positive : cls == 1 ? m.negative : m.neutral) += 1;

      const std::uint64_t replies = poisson(0.8, rng);
      std::uniform_int_distribution<Timestamp> delay(60, 4 * 3600);
      for (std::uint64_t r = 0; r < replies; ++r) {
        const Timestamp ts = b.timestamp + delay(rng);
        const int ccls = draw_class(e, rng);
        CommentRecord cm;
        cm.id = padded('c', ++comment_serial);
        cm.parent_blog_id = b.id;
        cm.timestamp = ts;
        cm.text = make_text(ccls, rng);
        cm.response_count = poisson(0.7, rng);
        if (ts - c.start >= horizon) continue;
        ManifestBucket& mc = inc[bucket_of(ts)];
        ++mc.comment_records;
        mc.responses += cm.response_count;
        (ccls == 0 ? mc.positive : ccls == 1 ? mc.negative : mc.neutral) += 1;
        ds.comments.push_back(std::move(cm));
      }
      ds.blogs.push_back(std::move(b));
    }
  }

  const auto snap_step = static_cast<Timestamp>(std::llround(c.snapshot_minutes * 60.0));
  std::uint64_t reads = 0;
  std::uint64_t discussions = 0;
  std::size_t counted = 0;
  std::vector<std::pair<Timestamp, std::pair<std::uint64_t, std::uint64_t>>> snaps;
  for (Timestamp ts = snap_step; ts < horizon; ts += snap_step) {
    std::uint64_t fresh = 0;
    while (counted < ds.blogs.size() && ds.blogs[counted].timestamp - c.start < ts) {
      ++fresh;
      ++counted;
    }
    reads += fresh * 150 + poisson(300, rng);
    discussions += fresh * 12 + poisson(20, rng);
    SnapshotStats s;
    s.timestamp = c.start + ts;
    s.total_reads = reads;
    s.total_discussions = discussions;
    ds.snapshots.push_back(s);
  }

  sort_records(ds);

  Manifest& man = out.manifest;
  man.seed = c.seed;
  man.event_id = c.event_id;
  man.start = c.start;
  man.window_hours = c.manifest_window_hours;
  man.bucket_count = bucket_count;
  ManifestBucket run;
  std::size_t snap = 0;
  for (std::size_t i = 0; i < bucket_count; ++i) {
    const ManifestBucket& d = inc[i];
    run.blogs += d.blogs;
    run.original_blogs += d.original_blogs;
    run.government_blogs += d.government_blogs;
    run.verified_authors += d.verified_authors;
    run.likes += d.likes;
    run.comments += d.comments;
    run.forwards += d.forwards;
    run.comment_records += d.comment_records;
    run.responses += d.responses;
    run.positive += d.positive;
    run.negative += d.negative;
    run.neutral += d.neutral;
    run.index = i;
    run.end = c.start + static_cast<Timestamp>(i + 1) * window;
    while (snap < ds.snapshots.size() && ds.snapshots[snap].timestamp < run.end) {
      run.reads = ds.snapshots[snap].total_reads;
      run.discussions = ds.snapshots[snap].total_discussions;
      ++snap;
    }
    man.buckets.push_back(run);
  }
  return out;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  json j;
  j["seed"] = m.seed;
  j["event_id"] = m.event_id;
  j["start"] = m.start;
  j["window_hours"] = m.window_hours;
  j["bucket_count"] = m.bucket_count;
  j["buckets"] = json::array();
  for (const auto& b : m.buckets) {
    j["buckets"].push_back({{"index", b.index},
                            {"end", b.end},
                            {"blogs", b.blogs},
                            {"original_blogs", b.original_blogs},
                            {"government_blogs", b.government_blogs},
                            {"verified_authors", b.verified_authors},
                            {"likes", b.likes},
                            {"comments", b.comments},
                            {"forwards", b.forwards},
                            {"comment_records", b.comment_records},
                            {"responses", b.responses},
                            {"reads", b.reads},
                            {"discussions", b.discussions},
                            {"positive", b.positive},
                            {"negative", b.negative},
                            {"neutral", b.neutral}});
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write '" + path.string() + "'");
  out << j.dump(1) << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open '" + path.string() + "'");
  Manifest m;
  try {
    const json j = json::parse(in);
    m.seed = j.at("seed").get<std::uint64_t>();
    m.event_id = j.at("event_id").get<std::string>();
    m.start = j.at("start").get<Timestamp>();
    m.window_hours = j.at("window_hours").get<double>();
    m.bucket_count = j.at("bucket_count").get<std::size_t>();
    for (const auto& b : j.at("buckets")) {
      ManifestBucket mb;
      mb.index = b.at("index").get<std::size_t>();
      mb.end = b.at("end").get<Timestamp>();
      mb.blogs = b.at("blogs").get<std::uint64_t>();
      mb.original_blogs = b.at("original_blogs").get<std::uint64_t>();
      mb.government_blogs = b.at("government_blogs").get<std::uint64_t>();
      mb.verified_authors = b.at("verified_authors").get<std::uint64_t>();
      mb.likes = b.at("likes").get<std::uint64_t>();
      mb.comments = b.at("comments").get<std::uint64_t>();
      mb.forwards = b.at("forwards").get<std::uint64_t>();
      mb.comment_records = b.at("comment_records").get<std::uint64_t>();
      mb.responses = b.at("responses").get<std::uint64_t>();
      mb.reads = b.at("reads").get<std::uint64_t>();
      mb.discussions = b.at("discussions").get<std::uint64_t>();
      mb.positive = b.at("positive").get<std::uint64_t>();
      mb.negative = b.at("negative").get<std::uint64_t>();
      mb.neutral = b.at("neutral").get<std::uint64_t>();
      m.buckets.push_back(mb);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace crisis::synth
