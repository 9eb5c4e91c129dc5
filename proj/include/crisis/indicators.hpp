#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "crisis/event_store.hpp"

namespace crisis {

// What an indicator measures. Several catalog codes may share a quantity
// (e.g. C124 and the rating-order name "posts").
enum class Quantity {
  AvgFollower,
  AvgAttention,
  AvgGrade,
  VerifiedAuthors,
  AvgHistoricalBlogs,
  TotalLikes,
  TotalComments,
  TotalResponses,
  TotalForwards,
  TotalBlogs,
  GovernmentBlogs,
  TotalReads,
  TotalDiscussions,
  BlogRate,
  ForwardRate,
  CommentRate,
  LikeRate,
  ResponseRate,
  PositiveCount,
  NegativeCount,
  NeutralCount,
  NegativeRate,
};

bool is_rate(Quantity q);
bool is_sentiment(Quantity q);

struct IndicatorId {
  std::string code;   // e.g. "C111", or a rating-order name such as "likes"
  std::string name;
  std::string group;  // B-level criterion, e.g. "B11"
  std::string tier;   // A-level, e.g. "A1"
  Quantity quantity;
};

// Looks a code up among every indicator this library knows (initial catalog
// codes plus the 13 rating-order names). Returns nullptr when unknown.
const IndicatorId* find_indicator(std::string_view code);

std::string group_title(std::string_view group);

class IndicatorCatalog {
 public:
  IndicatorCatalog() = default;
  explicit IndicatorCatalog(std::vector<IndicatorId> ids);

  // Table 1 style: the system before correlation/PCA pruning (22 indicators).
  static IndicatorCatalog initial();
  // Table 13 style: the pruned 18-indicator system.
  static IndicatorCatalog final_system();
  // The 13 indicators in benchmark order.
  static IndicatorCatalog rating_order();
  static IndicatorCatalog from_codes(std::span<const std::string> codes);

  // Accepts "initial", "final", "rating", the monitoring subsets "paper3",
  // "paper7", "paper11", "paper14", "paper18", or a comma-separated code list.
  static IndicatorCatalog parse(std::string_view spec);

  const std::vector<IndicatorId>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  std::vector<std::string> codes() const;
  std::optional<std::size_t> position(std::string_view code) const;

  // B-level groups in order of first appearance.
  std::vector<std::string> groups() const;
  std::vector<std::string> group_codes(std::string_view group) const;

  // Keeps the listed codes, in this catalog's order.
  IndicatorCatalog subset(std::span<const std::string> codes) const;

  bool needs_rates() const;
  bool needs_sentiment() const;

  bool operator==(const IndicatorCatalog& other) const { return codes() == other.codes(); }

 private:
  std::vector<IndicatorId> ids_;
};

// (sum - max - min) / (n - 2), removing exactly one maximal and one minimal
// element. Plain mean for n in {1, 2}. Throws MissingData on empty input.
double trimmed_mean(std::span<const double> values);

// (cur - prev) / dt_hours. Throws InvalidWindow if dt_hours <= 0.
double rate_of_change(double prev_total, double cur_total, double dt_hours);

enum class SentimentClass : std::uint8_t { Positive = 0, Negative = 1, Neutral = 2 };

struct SentimentCounts {
  std::uint64_t positive = 0;
  std::uint64_t negative = 0;
  std::uint64_t neutral = 0;

  bool operator==(const SentimentCounts&) const = default;
};

// Class of every blog and comment, aligned with the dataset's record order.
struct RecordLabels {
  std::vector<SentimentClass> blogs;
  std::vector<SentimentClass> comments;
};

// Counts over the bucket's cumulative view.
SentimentCounts tally(const TimeBucket& bucket, const RecordLabels& labels);

class IndicatorVector {
 public:
  IndicatorVector() = default;
  IndicatorVector(std::size_t bucket_index, std::vector<std::string> codes);

  std::size_t bucket_index() const { return bucket_index_; }
  const std::vector<std::string>& codes() const { return codes_; }
  const std::vector<std::optional<double>>& values() const { return values_; }

  void set(std::string_view code, double value);
  void set_missing(std::string_view code);
  std::optional<double> get(std::string_view code) const;
  bool has(std::string_view code) const;

  std::vector<std::string> missing() const;
  bool complete() const { return missing().empty(); }

  bool operator==(const IndicatorVector&) const = default;

 private:
  std::size_t index_of(std::string_view code) const;

  std::size_t bucket_index_ = 0;
  std::vector<std::string> codes_;
  std::vector<std::optional<double>> values_;
};

// Indicator values for one bucket. Author statistics use original-blog authors
// only; totals come from the cumulative view; rates need `prev` (otherwise
// they are marked missing); sentiment indicators need `counts` (and
// `prev_counts` for the negative-count rate).
IndicatorVector compute_vector(const TimeBucket& bucket, const TimeBucket* prev,
                               const IndicatorCatalog& catalog,
                               const std::optional<SentimentCounts>& counts,
                               const std::optional<SentimentCounts>& prev_counts = std::nullopt);

struct IndicatorMatrix {
  std::vector<IndicatorId> columns;
  std::vector<std::size_t> bucket_indices;
  Eigen::MatrixXd values;
  std::vector<std::string> exclusions;  // one entry per dropped incomplete row

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  std::optional<std::size_t> column(std::string_view code) const;
};

// Rows sorted by bucket index; rows missing any catalog column are excluded
// and logged. Throws NoCompleteRows if nothing survives.
IndicatorMatrix build_matrix(std::span<const IndicatorVector> vectors, const IndicatorCatalog& catalog);

// Header "bucket,<codes...>", one row per vector, missing cells empty.
void write_indicator_csv(std::span<const IndicatorVector> vectors, const std::filesystem::path& path);
std::string format_indicator_csv(std::span<const IndicatorVector> vectors);
std::vector<IndicatorVector> read_indicator_csv(const std::filesystem::path& path);

}  // namespace crisis
