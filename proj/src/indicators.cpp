#include "crisis/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "crisis/csv.hpp"
#include "crisis/error.hpp"

namespace crisis {

namespace {

using Q = Quantity;

const std::vector<IndicatorId>& initial_ids() {
  static const std::vector<IndicatorId> ids = {
      {"C111", "Average followers (AvgFollower)", "B11", "A1", Q::AvgFollower},
      {"C112", "Average attentions (AvgAttention)", "B11", "A1", Q::AvgAttention},
      {"C115", "Average grade (AvgGrade)", "B11", "A1", Q::AvgGrade},
      {"C113", "V number", "B11", "A1", Q::VerifiedAuthors},
      {"C114", "Average historical blog volume (AvgHisVol)", "B11", "A1", Q::AvgHistoricalBlogs},
      {"C121", "Total likes", "B12", "A1", Q::TotalLikes},
      {"C122", "Total comments", "B12", "A1", Q::TotalComments},
      {"C126", "Total comment responses", "B12", "A1", Q::TotalResponses},
      {"C123", "Total forwards", "B12", "A1", Q::TotalForwards},
      {"C124", "Total blog volume", "B12", "A1", Q::TotalBlogs},
      {"C125", "Blogs sent by the government", "B12", "A1", Q::GovernmentBlogs},
      {"C211", "Total reading", "B21", "A2", Q::TotalReads},
      {"C212", "Total discussion", "B21", "A2", Q::TotalDiscussions},
      {"C221", "Blog volume change rate (RVol)", "B22", "A2", Q::BlogRate},
      {"C222", "Forwarding change rate (RFor)", "B22", "A2", Q::ForwardRate},
      {"C223", "Comment change rate (RRev)", "B22", "A2", Q::CommentRate},
      {"C224", "Like change rate (RLik)", "B22", "A2", Q::LikeRate},
      {"C225", "Comment response change rate (RRes)", "B22", "A2", Q::ResponseRate},
      {"C311", "Positive blog + comment volume", "B31", "A3", Q::PositiveCount},
      {"C312", "Negative blog + comment volume", "B31", "A3", Q::NegativeCount},
      {"C313", "Neutral blog + comment volume", "B31", "A3", Q::NeutralCount},
      {"C314", "Negative volume change rate (RNeg)", "B31", "A3", Q::NegativeRate},
  };
  return ids;
}

// Benchmark order. "microblogs" is read as the comment change rate: it is the
// only rate of the final system missing from the list and its benchmark values
// (3.7, 3.5, 3, 1.2) have the magnitude of the neighbouring rates.
const std::vector<IndicatorId>& rating_ids() {
  static const std::vector<IndicatorId> ids = {
      {"likes", "likes", "B12", "A1", Q::TotalLikes},
      {"comments", "comments", "B12", "A1", Q::TotalComments},
      {"reposts", "reposts", "B12", "A1", Q::TotalForwards},
      {"posts", "posts", "B12", "A1", Q::TotalBlogs},
      {"discussions", "discussions", "B21", "A2", Q::TotalDiscussions},
      {"reads", "reads", "B21", "A2", Q::TotalReads},
      {"microblogs", "microblogs", "B22", "A2", Q::CommentRate},
      {"post_change_rate", "post change rate", "B22", "A2", Q::BlogRate},
      {"repost_change_rate", "repost change rate", "B22", "A2", Q::ForwardRate},
      {"likes_change_rate", "likes change rate", "B22", "A2", Q::LikeRate},
      {"positive", "positive quantity", "B31", "A3", Q::PositiveCount},
      {"negative", "negative quantity", "B31", "A3", Q::NegativeCount},
      {"neutral", "neutral quantity", "B31", "A3", Q::NeutralCount},
  };
  return ids;
}

std::vector<std::string> split_codes(std::string_view spec) {
  std::vector<std::string> codes;
  for (const auto& field : csv::split(spec, ',')) {
    std::string code = csv::trim(field);
    if (!code.empty()) codes.push_back(std::move(code));
  }
  return codes;
}

}  // namespace

bool is_rate(Quantity q) {
  switch (q) {
    case Q::BlogRate:
    case Q::ForwardRate:
    case Q::CommentRate:
    case Q::LikeRate:
    case Q::ResponseRate:
    case Q::NegativeRate:
      return true;
    default:
      return false;
  }
}

bool is_sentiment(Quantity q) {
  return q == Q::PositiveCount || q == Q::NegativeCount || q == Q::NeutralCount || q == Q::NegativeRate;
}

const IndicatorId* find_indicator(std::string_view code) {
  for (const auto& id : initial_ids())
    if (id.code == code) return &id;
  for (const auto& id : rating_ids())
    if (id.code == code) return &id;
  return nullptr;
}

std::string group_title(std::string_view group) {
  static const std::map<std::string, std::string, std::less<>> titles = {
      {"B11", "Internet User Importance"}, {"B12", "Internet User Participation"},
      {"B21", "Topic Attention"},          {"B22", "Topic Activity"},
      {"B31", "Topic Sentiment Tendency"},
  };
  auto it = titles.find(group);
  return it == titles.end() ? std::string(group) : it->second;
}

IndicatorCatalog::IndicatorCatalog(std::vector<IndicatorId> ids) : ids_(std::move(ids)) {
  std::set<std::string> seen;
  for (const auto& id : ids_)
    if (!seen.insert(id.code).second)
      throw Error(ErrorCode::CatalogMismatch, "duplicate indicator code '" + id.code + "'");
}

IndicatorCatalog IndicatorCatalog::initial() { return IndicatorCatalog(initial_ids()); }

IndicatorCatalog IndicatorCatalog::final_system() {
  return parse("C111,C112,C113,C114,C121,C122,C123,C124,C125,C211,C212,C221,C222,C223,C224,C311,C312,C313");
}

IndicatorCatalog IndicatorCatalog::rating_order() { return IndicatorCatalog(rating_ids()); }

IndicatorCatalog IndicatorCatalog::from_codes(std::span<const std::string> codes) {
  std::vector<IndicatorId> ids;
  for (const auto& code : codes) {
    const IndicatorId* id = find_indicator(code);
    if (id == nullptr) throw Error(ErrorCode::CatalogMismatch, "unknown indicator code '" + code + "'");
    ids.push_back(*id);
  }
  return IndicatorCatalog(std::move(ids));
}

IndicatorCatalog IndicatorCatalog::parse(std::string_view spec) {
  const std::string s = csv::trim(spec);
  if (s == "initial") return initial();
  if (s == "final" || s == "paper18") return final_system();
  if (s == "rating") return rating_order();
  if (s == "paper3") return parse("C124,C211,C212");
  if (s == "paper7") return parse("C121,C122,C123,C124,C125,C211,C212");
  if (s == "paper11") return parse("C121,C122,C123,C124,C125,C211,C212,C221,C222,C223,C224");
  if (s == "paper14")
    return parse("C121,C122,C123,C124,C125,C211,C212,C221,C222,C223,C224,C311,C312,C313");
  const auto codes = split_codes(s);
  if (codes.empty()) throw Error(ErrorCode::CatalogMismatch, "empty indicator catalog");
  return from_codes(codes);
}

std::vector<std::string> IndicatorCatalog::codes() const {
  std::vector<std::string> out;
  out.reserve(ids_.size());
  for (const auto& id : ids_) out.push_back(id.code);
  return out;
}

std::optional<std::size_t> IndicatorCatalog::position(std::string_view code) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i].code == code) return i;
  return std::nullopt;
}

std::vector<std::string> IndicatorCatalog::groups() const {
  std::vector<std::string> out;
  for (const auto& id : ids_)
    if (std::find(out.begin(), out.end(), id.group) == out.end()) out.push_back(id.group);
  return out;
}

std::vector<std::string> IndicatorCatalog::group_codes(std::string_view group) const {
  std::vector<std::string> out;
  for (const auto& id : ids_)
    if (id.group == group) out.push_back(id.code);
  return out;
}

IndicatorCatalog IndicatorCatalog::subset(std::span<const std::string> codes) const {
  for (const auto& code : codes)
    if (!position(code)) throw Error(ErrorCode::CatalogMismatch, "code '" + code + "' not in catalog");
  std::vector<IndicatorId> kept;
  for (const auto& id : ids_)
    if (std::find(codes.begin(), codes.end(), id.code) != codes.end()) kept.push_back(id);
  return IndicatorCatalog(std::move(kept));
}

bool IndicatorCatalog::needs_rates() const {
  return std::any_of(ids_.begin(), ids_.end(), [](const IndicatorId& id) { return is_rate(id.quantity); });
}

bool IndicatorCatalog::needs_sentiment() const {
  return std::any_of(ids_.begin(), ids_.end(), [](const IndicatorId& id) { return is_sentiment(id.quantity); });
}

double trimmed_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::MissingData, "trimmed mean of an empty list");
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it;
  const double hi = *max_it;
  if (values.size() < 3) {
    double sum = 0;
    for (double v : values) sum += v;
    return std::clamp(sum / static_cast<double>(values.size()), lo, hi);
  }
  // Skip one minimal and one distinct-position maximal element.
  auto skip_max = max_it;
  if (skip_max == min_it) skip_max = std::next(values.begin(), min_it == values.begin() ? 1 : 0);
  double sum = 0;
  for (auto it = values.begin(); it != values.end(); ++it)
    if (it != min_it && it != skip_max) sum += *it;
  return std::clamp(sum / static_cast<double>(values.size() - 2), lo, hi);
}

double rate_of_change(double prev_total, double cur_total, double dt_hours) {
  if (!(dt_hours > 0)) throw Error(ErrorCode::InvalidWindow, "rate window must be positive");
  return (cur_total - prev_total) / dt_hours;
}

SentimentCounts tally(const TimeBucket& bucket, const RecordLabels& labels) {
  if (labels.blogs.size() < bucket.blogs.size() || labels.comments.size() < bucket.comments.size())
    throw Error(ErrorCode::CatalogMismatch, "sentiment labels do not cover the bucket");
  SentimentCounts counts;
  auto add = [&counts](SentimentClass c) {
    switch (c) {
      case SentimentClass::Positive: ++counts.positive; break;
      case SentimentClass::Negative: ++counts.negative; break;
      case SentimentClass::Neutral: ++counts.neutral; break;
    }
  };
  for (std::size_t i = 0; i < bucket.blogs.size(); ++i) add(labels.blogs[i]);
  for (std::size_t i = 0; i < bucket.comments.size(); ++i) add(labels.comments[i]);
  return counts;
}

IndicatorVector::IndicatorVector(std::size_t bucket_index, std::vector<std::string> codes)
    : bucket_index_(bucket_index), codes_(std::move(codes)), values_(codes_.size()) {}

std::size_t IndicatorVector::index_of(std::string_view code) const {
  for (std::size_t i = 0; i < codes_.size(); ++i)
    if (codes_[i] == code) return i;
  throw Error(ErrorCode::CatalogMismatch, "indicator '" + std::string(code) + "' not in vector");
}

void IndicatorVector::set(std::string_view code, double value) {
  if (!std::isfinite(value))
    throw Error(ErrorCode::InvalidArgument, "non-finite value for '" + std::string(code) + "'");
  values_[index_of(code)] = value;
}

void IndicatorVector::set_missing(std::string_view code) { values_[index_of(code)].reset(); }

std::optional<double> IndicatorVector::get(std::string_view code) const { return values_[index_of(code)]; }

bool IndicatorVector::has(std::string_view code) const {
  return std::find(codes_.begin(), codes_.end(), code) != codes_.end();
}

std::vector<std::string> IndicatorVector::missing() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < codes_.size(); ++i)
    if (!values_[i]) out.push_back(codes_[i]);
  return out;
}

namespace {

struct Totals {
  double likes = 0;
  double comments = 0;
  double responses = 0;
  double forwards = 0;
  double blogs = 0;
  double government = 0;
};

Totals totals_of(const TimeBucket& b) {
  Totals t;
  for (const auto& blog : b.blogs) {
    t.likes += static_cast<double>(blog.like_count);
    t.comments += static_cast<double>(blog.comment_count);
    t.forwards += static_cast<double>(blog.forward_count);
    if (blog.is_government) t.government += 1;
  }
  for (const auto& c : b.comments) t.responses += static_cast<double>(c.response_count);
  t.blogs = static_cast<double>(b.blogs.size());
  return t;
}

// Latest profile of each distinct original-blog author in the view.
std::vector<AuthorProfile> original_authors(const TimeBucket& b) {
  std::vector<AuthorProfile> out;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& blog : b.blogs) {
    if (!blog.is_original) continue;
    const std::string key = blog.author.id.empty() ? "#blog:" + blog.id : "@" + blog.author.id;
    auto [it, inserted] = slot.try_emplace(key, out.size());
    if (inserted) {
      out.push_back(blog.author);
    } else {
      out[it->second] = blog.author;
    }
  }
  return out;
}

template <typename F>
std::optional<double> author_trimmed_mean(const std::vector<AuthorProfile>& authors, F field) {
  if (authors.empty()) return std::nullopt;
  std::vector<double> xs;
  xs.reserve(authors.size());
  for (const auto& a : authors) xs.push_back(static_cast<double>(field(a)));
  return trimmed_mean(xs);
}

}  // namespace

IndicatorVector compute_vector(const TimeBucket& bucket, const TimeBucket* prev, const IndicatorCatalog& catalog,
                               const std::optional<SentimentCounts>& counts,
                               const std::optional<SentimentCounts>& prev_counts) {
  if (catalog.needs_sentiment() && !counts)
    throw Error(ErrorCode::CatalogMismatch, "catalog requires sentiment counts but none were supplied");

  IndicatorVector vec(bucket.index, catalog.codes());
  const Totals cur = totals_of(bucket);
  std::optional<Totals> before;
  double dt_hours = 0;
  if (prev != nullptr) {
    before = totals_of(*prev);
    dt_hours = (bucket.end - prev->end) / 3600.0;
  }
  const auto authors = original_authors(bucket);

  auto rate = [&](double Totals::*field) -> std::optional<double> {
    if (!before) return std::nullopt;
    return rate_of_change((*before).*field, cur.*field, dt_hours);
  };

  for (const auto& id : catalog.ids()) {
    std::optional<double> value;
    switch (id.quantity) {
      case Q::AvgFollower:
        value = author_trimmed_mean(authors, [](const AuthorProfile& a) { return a.follower_count; });
        break;
      case Q::AvgAttention:
        value = author_trimmed_mean(authors, [](const AuthorProfile& a) { return a.attention_count; });
        break;
      case Q::AvgGrade:
        value = author_trimmed_mean(authors, [](const AuthorProfile& a) { return a.grade; });
        break;
      case Q::AvgHistoricalBlogs:
        value = author_trimmed_mean(authors, [](const AuthorProfile& a) { return a.historical_blog_count; });
        break;
      case Q::VerifiedAuthors:
        value = static_cast<double>(
            std::count_if(authors.begin(), authors.end(), [](const AuthorProfile& a) { return a.is_verified; }));
        break;
      case Q::TotalLikes: value = cur.likes; break;
      case Q::TotalComments: value = cur.comments; break;
      case Q::TotalResponses: value = cur.responses; break;
      case Q::TotalForwards: value = cur.forwards; break;
      case Q::TotalBlogs: value = cur.blogs; break;
      case Q::GovernmentBlogs: value = cur.government; break;
      case Q::TotalReads:
        if (bucket.snapshot_at_end) value = static_cast<double>(bucket.snapshot_at_end->total_reads);
        break;
      case Q::TotalDiscussions:
        if (bucket.snapshot_at_end) value = static_cast<double>(bucket.snapshot_at_end->total_discussions);
        break;
      case Q::BlogRate: value = rate(&Totals::blogs); break;
      case Q::ForwardRate: value = rate(&Totals::forwards); break;
      case Q::CommentRate: value = rate(&Totals::comments); break;
      case Q::LikeRate: value = rate(&Totals::likes); break;
      case Q::ResponseRate: value = rate(&Totals::responses); break;
      case Q::PositiveCount: value = static_cast<double>(counts->positive); break;
      case Q::NegativeCount: value = static_cast<double>(counts->negative); break;
      case Q::NeutralCount: value = static_cast<double>(counts->neutral); break;
      case Q::NegativeRate:
        if (prev != nullptr) {
          if (!prev_counts)
            throw Error(ErrorCode::CatalogMismatch, "negative-count rate needs the previous bucket's counts");
          value = rate_of_change(static_cast<double>(prev_counts->negative), static_cast<double>(counts->negative),
                                 dt_hours);
        }
        break;
    }
    if (value) vec.set(id.code, *value);
  }
  return vec;
}

std::optional<std::size_t> IndicatorMatrix::column(std::string_view code) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].code == code) return i;
  return std::nullopt;
}

IndicatorMatrix build_matrix(std::span<const IndicatorVector> vectors, const IndicatorCatalog& catalog) {
  IndicatorMatrix m;
  m.columns = catalog.ids();

  std::vector<const IndicatorVector*> ordered;
  for (const auto& v : vectors) ordered.push_back(&v);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const IndicatorVector* a, const IndicatorVector* b) { return a->bucket_index() < b->bucket_index(); });

  std::vector<std::vector<double>> rows;
  for (const IndicatorVector* v : ordered) {
    std::vector<double> row;
    std::vector<std::string> absent;
    for (const auto& id : catalog.ids()) {
      if (!v->has(id.code))
        throw Error(ErrorCode::CatalogMismatch,
                    "bucket " + std::to_string(v->bucket_index()) + " has no column '" + id.code + "'");
      auto value = v->get(id.code);
      if (value) {
        row.push_back(*value);
      } else {
        absent.push_back(id.code);
      }
    }
    if (!absent.empty()) {
      std::string msg = "bucket " + std::to_string(v->bucket_index()) + " excluded, missing";
      for (const auto& c : absent) msg += " " + c;
      m.exclusions.push_back(std::move(msg));
      continue;
    }
    m.bucket_indices.push_back(v->bucket_index());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::NoCompleteRows, "no bucket has every requested indicator");

  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(catalog.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < catalog.size(); ++c)
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

std::string format_indicator_csv(std::span<const IndicatorVector> vectors) {
  std::ostringstream out;
  if (vectors.empty()) return "bucket\n";
  const auto& codes = vectors.front().codes();
  out << "bucket";
  for (const auto& c : codes) out << ',' << c;
  out << '\n';
  for (const auto& v : vectors) {
    if (v.codes() != codes) throw Error(ErrorCode::CatalogMismatch, "indicator vectors use different catalogs");
    out << v.bucket_index();
    for (const auto& value : v.values()) {
      out << ',';
      if (value) out << csv::format_number(*value);
    }
    out << '\n';
  }
  return out.str();
}

void write_indicator_csv(std::span<const IndicatorVector> vectors, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write '" + path.string() + "'");
  out << format_indicator_csv(vectors);
}

std::vector<IndicatorVector> read_indicator_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::SchemaViolation, path.string() + ": empty file");
  auto header = csv::split(csv::trim(line));
  if (header.empty() || csv::trim(header.front()) != "bucket")
    throw Error(ErrorCode::SchemaViolation, path.string() + ": line 1: first column must be 'bucket'");
  std::vector<std::string> codes;
  for (std::size_t i = 1; i < header.size(); ++i) {
    std::string code = csv::trim(header[i]);
    if (!find_indicator(code))
      throw Error(ErrorCode::SchemaViolation, path.string() + ": line 1: unknown indicator '" + code + "'");
    codes.push_back(std::move(code));
  }

  std::vector<IndicatorVector> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split(csv::trim(line));
    if (fields.size() != codes.size() + 1)
      throw Error(ErrorCode::SchemaViolation,
                  path.string() + ": line " + std::to_string(line_no) + ": expected " +
                      std::to_string(codes.size() + 1) + " fields");
    try {
      const double bucket = csv::parse_number(fields[0]);
      if (bucket < 0 || bucket != std::floor(bucket)) throw Error(ErrorCode::InvalidArgument, "bad bucket index");
      IndicatorVector v(static_cast<std::size_t>(bucket), codes);
      for (std::size_t i = 0; i < codes.size(); ++i) {
        if (!csv::trim(fields[i + 1]).empty()) v.set(codes[i], csv::parse_number(fields[i + 1]));
      }
      out.push_back(std::move(v));
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaViolation, path.string() + ": line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  return out;
}

}  // namespace crisis
