#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crisis/event_store.hpp"
#include "crisis/indicators.hpp"
#include "crisis/rating.hpp"
#include "crisis/selection.hpp"
#include "crisis/sentiment.hpp"

namespace crisis {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "CRISIS_OUTPUT_DIR";

// Predecessor of the first bucket for rate indicators: the empty state at the
// event start, or none (the first bucket then has no rates).
enum class RateBaseline { Origin, None };

struct ConfigKey {
  const char* section;
  const char* key;
  const char* default_value;
  const char* help;
  bool is_path;
};

// Every recognised key, in file order. Key names are unique across sections so
// each one doubles as a command-line flag.
std::span<const ConfigKey> config_keys();

struct PipelineConfig {
  std::filesystem::path input;
  double window_hours = 2.0;
  LoadPolicy policy = LoadPolicy::Strict;
  std::string catalog = "final";

  std::filesystem::path model;         // empty: train from train_corpus
  std::filesystem::path train_corpus;
  sentiment::Hyperparams hyper;

  std::string benchmarks = "default";  // "default" or a benchmark file
  rating::GraConfig gra;
  std::vector<std::string> subsets;    // extra catalogs rated side by side
  RateBaseline rate_baseline = RateBaseline::Origin;

  bool select = false;
  selection::SelectionConfig selection;

  std::filesystem::path output_dir = "out";
  bool write_csv = true;
  bool write_svg = true;
  std::uint64_t seed = 42;

  // Effective key/value pairs, in config_keys() order.
  std::vector<std::pair<std::string, std::string>> echo;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Precedence: built-in defaults, then the file (relative paths resolve against
// its directory), then the output-directory environment variable, then
// `overrides`. Throws ConfigError (stage "config") on unknown keys or bad
// values.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const Overrides& overrides,
                           bool use_env = true);

struct MonitorRow {
  std::size_t bucket = 0;
  double start = 0;
  double end = 0;
  IndicatorVector vector;
  std::optional<SentimentCounts> counts;
  rating::CrisisAssessment assessment;
  std::vector<std::optional<int>> subset_levels;  // aligned with MonitorReport::subset_names
};

struct MonitorReport {
  std::string event_id;
  double event_start = 0;
  IndicatorCatalog catalog;                   // catalog after optional selection
  std::vector<std::string> rated_codes;       // benchmark columns used for rating
  std::vector<std::string> subset_names;
  std::vector<MonitorRow> rows;               // one per rated bucket
  std::optional<selection::SelectionResult> selection;
  std::vector<std::string> log;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
};

// Sentiment model from config: loaded when `model` is set, trained otherwise.
sentiment::SentimentModel obtain_model(const PipelineConfig& config, std::vector<std::string>* log = nullptr);

rating::BenchmarkMatrix obtain_benchmarks(const PipelineConfig& config);

struct IndicatorTable {
  std::string event_id;
  double event_start = 0;
  std::vector<double> bucket_start;
  std::vector<double> bucket_end;
  std::vector<std::optional<SentimentCounts>> counts;  // empty entries when no sentiment model ran
  std::vector<std::vector<IndicatorVector>> vectors;   // one list per requested catalog
  std::vector<std::string> log;
};

// Ingest, optional sentiment labelling and per-bucket indicator vectors for
// each catalog. Sentiment runs when a catalog needs it or a model source is
// configured.
IndicatorTable compute_indicators(const PipelineConfig& config, std::span<const IndicatorCatalog> catalogs);

// ingest, sentiment, indicators, optional selection, rating. Errors carry the
// stage that raised them.
MonitorReport run_monitor(const PipelineConfig& config);

std::string format_monitor_csv(const MonitorReport& report);

// Inverse of format_monitor_csv for re-rendering; the breakdown is not stored
// and stays empty. The event start is recovered from the first row's bucket
// index and width, and the event id is the file stem.
MonitorReport read_monitor_csv(const std::filesystem::path& path);

std::string sentiment_chart(const MonitorReport& report);
std::string level_chart(const MonitorReport& report);

// monitor.csv and/or sentiment.svg plus levels.svg (and the selection reports
// when selection ran). Returns the files written.
std::vector<std::filesystem::path> render_report(const MonitorReport& report, bool csv, bool svg,
                                                 const std::filesystem::path& dir);

// Config echo, version, seed and log as JSON.
void write_run_metadata(const MonitorReport& report, const std::filesystem::path& path);

}  // namespace crisis
