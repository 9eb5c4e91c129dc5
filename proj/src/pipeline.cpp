#include "crisis/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "crisis/csv.hpp"
#include "crisis/error.hpp"
#include "crisis/svg.hpp"

namespace crisis {

namespace {

constexpr ConfigKey kKeys[] = {
    {"data", "input", "", "event record file (JSONL)", true},
    {"data", "window_hours", "2", "bucket width in hours", false},
    {"data", "policy", "strict", "strict: any bad line aborts; lenient: skip and report bad lines", false},
    {"indicators", "catalog", "final", "initial, final, rating, paper3..paper18 or a comma-separated code list",
     false},
    {"sentiment", "model", "", "trained sentiment model file; empty trains from train_corpus", true},
    {"sentiment", "train_corpus", "", "labelled corpus (label<TAB>text) used when no model is given", true},
    {"sentiment", "embed_dim", "16", "embedding width", false},
    {"sentiment", "hidden_size", "16", "LSTM hidden width", false},
    {"sentiment", "learning_rate", "0.1", "SGD learning rate", false},
    {"sentiment", "epochs", "500", "training epochs", false},
    {"sentiment", "batch_size", "5", "mini-batch size, 0 for full batch", false},
    {"rating", "benchmarks", "default", "benchmark file, or default for the built-in four levels", true},
    {"rating", "rho", "0.5", "resolution coefficient in (0, 1)", false},
    {"rating", "normalization", "benchmark-max", "none or benchmark-max", false},
    {"rating", "weights", "", "comma-separated weights, one per benchmark column; empty for uniform", false},
    {"rating", "subsets", "", "extra catalogs rated alongside, e.g. paper3,paper7", false},
    {"rating", "rate_baseline", "origin", "origin: first bucket rates against the event start; none: no rates",
     false},
    {"selection", "select", "false", "run correlation pruning and PCA before rating", false},
    {"selection", "corr_threshold", "0.84", "|R_s| at or above which a pair is redundant", false},
    {"selection", "cum_threshold", "0.90", "cumulative variance share that fixes the component count", false},
    {"output", "output_dir", "out", "directory for reports", true},
    {"output", "formats", "csv,svg", "comma-separated subset of csv,svg", false},
    {"run", "seed", "42", "seed for sentiment training", false},
};

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "key '" + key + "': " + what).with_stage("config");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (auto& part : csv::split(value, ',')) {
    auto t = csv::trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

double as_double(const std::string& key, const std::string& value) {
  try {
    return csv::parse_number(csv::trim(value));
  } catch (const Error&) {
    config_error(key, "expected a number, got '" + value + "'");
  }
}

long long as_integer(const std::string& key, const std::string& value, long long min) {
  const double v = as_double(key, value);
  if (v != std::floor(v) || v < static_cast<double>(min) || v > 9e15)
    config_error(key, "expected an integer >= " + std::to_string(min) + ", got '" + value + "'");
  return static_cast<long long>(v);
}

bool as_bool(const std::string& key, const std::string& value) {
  const std::string v = csv::trim(value);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  config_error(key, "expected true or false, got '" + value + "'");
}

const ConfigKey* find_key(std::string_view key) {
  for (const auto& k : kKeys)
    if (key == k.key) return &k;
  return nullptr;
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  }
}

}  // namespace

std::span<const ConfigKey> config_keys() { return kKeys; }

PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const Overrides& overrides,
                           bool use_env) {
  std::map<std::string, std::string> values;
  for (const auto& k : kKeys) values[k.key] = k.default_value;

  if (file) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open config '" + file->string() + "'").with_stage("config");
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw Error(ErrorCode::ConfigError, file->string() + ":" + std::to_string(e.line()) + ": " + e.message())
          .with_stage("config");
    }
    const std::filesystem::path base = file->parent_path();
    for (const auto& [section, child] : tree) {
      if (child.empty())
        throw Error(ErrorCode::ConfigError, file->string() + ": key '" + section + "' is outside any section")
            .with_stage("config");
      for (const auto& [key, node] : child) {
        const ConfigKey* k = find_key(key);
        if (k == nullptr || section != k->section)
          throw Error(ErrorCode::ConfigError, file->string() + ": unknown key '" + section + "." + key + "'")
              .with_stage("config");
        std::string value = csv::trim(node.data());
        if (k->is_path && !value.empty() && !(std::string_view(k->key) == "benchmarks" && value == "default")) {
          std::filesystem::path p(value);
          if (p.is_relative()) value = (base / p).lexically_normal().string();
        }
        values[key] = value;
      }
    }
  }
  if (use_env) {
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') values["output_dir"] = env;
  }
  for (const auto& [key, value] : overrides) {
    if (find_key(key) == nullptr) config_error(key, "unknown key");
    values[key] = value;
  }

  PipelineConfig c;
  c.input = values["input"];
  if (c.input.empty()) config_error("input", "an input record file is required");
  c.window_hours = as_double("window_hours", values["window_hours"]);
  if (!(c.window_hours > 0)) config_error("window_hours", "must be positive");
  const std::string policy = values["policy"];
  if (policy == "strict") {
    c.policy = LoadPolicy::Strict;
  } else if (policy == "lenient") {
    c.policy = LoadPolicy::Lenient;
  } else {
    config_error("policy", "expected strict or lenient, got '" + policy + "'");
  }

  c.catalog = values["catalog"];
  try {
    (void)IndicatorCatalog::parse(c.catalog);
  } catch (const Error& e) {
    config_error("catalog", e.detail());
  }

  c.model = values["model"];
  c.train_corpus = values["train_corpus"];
  c.hyper.embed_dim = static_cast<int>(as_integer("embed_dim", values["embed_dim"], 1));
  c.hyper.hidden_size = static_cast<int>(as_integer("hidden_size", values["hidden_size"], 1));
  c.hyper.learning_rate = as_double("learning_rate", values["learning_rate"]);
  if (!(c.hyper.learning_rate > 0)) config_error("learning_rate", "must be positive");
  c.hyper.epochs = static_cast<int>(as_integer("epochs", values["epochs"], 1));
  c.hyper.batch_size = static_cast<std::size_t>(as_integer("batch_size", values["batch_size"], 0));

  c.benchmarks = values["benchmarks"];
  if (c.benchmarks.empty()) config_error("benchmarks", "must be 'default' or a file");
  c.gra.rho = as_double("rho", values["rho"]);
  if (!(c.gra.rho > 0 && c.gra.rho < 1)) config_error("rho", "must lie in (0, 1)");
  try {
    c.gra.normalization = rating::parse_normalization(csv::trim(values["normalization"]));
  } catch (const Error& e) {
    config_error("normalization", e.detail());
  }
  for (const auto& w : split_list(values["weights"])) {
    const double v = as_double("weights", w);
    if (!(v > 0)) config_error("weights", "weights must be positive");
    c.gra.weights.push_back(v);
  }
  c.subsets = split_list(values["subsets"]);
  for (const auto& s : c.subsets) {
    try {
      (void)IndicatorCatalog::parse(s);
    } catch (const Error& e) {
      config_error("subsets", e.detail());
    }
  }
  const std::string baseline = values["rate_baseline"];
  if (baseline == "origin") {
    c.rate_baseline = RateBaseline::Origin;
  } else if (baseline == "none") {
    c.rate_baseline = RateBaseline::None;
  } else {
    config_error("rate_baseline", "expected origin or none, got '" + baseline + "'");
  }

  c.select = as_bool("select", values["select"]);
  c.selection.corr_threshold = as_double("corr_threshold", values["corr_threshold"]);
  c.selection.cum_threshold = as_double("cum_threshold", values["cum_threshold"]);
  try {
    c.selection.validate();
  } catch (const Error& e) {
    config_error("selection", e.detail());
  }

  c.output_dir = values["output_dir"];
  if (c.output_dir.empty()) config_error("output_dir", "must not be empty");
  c.write_csv = false;
  c.write_svg = false;
  for (const auto& f : split_list(values["formats"])) {
    if (f == "csv") {
      c.write_csv = true;
    } else if (f == "svg") {
      c.write_svg = true;
    } else {
      config_error("formats", "unknown format '" + f + "'");
    }
  }
  c.seed = static_cast<std::uint64_t>(as_integer("seed", values["seed"], 0));
  c.hyper.seed = c.seed;

  for (const auto& k : kKeys) c.echo.emplace_back(k.key, values[k.key]);
  return c;
}

sentiment::SentimentModel obtain_model(const PipelineConfig& config, std::vector<std::string>* log) {
  if (!config.model.empty()) {
    auto model = sentiment::load_model(config.model);
    if (log) log->push_back("sentiment: loaded model " + config.model.string());
    return model;
  }
  if (config.train_corpus.empty())
    throw Error(ErrorCode::ConfigError, "sentiment indicators need 'model' or 'train_corpus'");
  const auto corpus = sentiment::read_corpus(config.train_corpus);
  auto result = sentiment::train(corpus, config.hyper);
  if (log) {
    std::ostringstream msg;
    msg << "sentiment: trained on " << corpus.size() << " examples from " << config.train_corpus.string()
        << ", training accuracy " << csv::format_number(result.accuracy_history.back());
    log->push_back(msg.str());
  }
  return std::move(result.model);
}

rating::BenchmarkMatrix obtain_benchmarks(const PipelineConfig& config) {
  rating::BenchmarkMatrix bm =
      config.benchmarks == "default" ? rating::default_benchmarks() : rating::read_benchmarks(config.benchmarks);
  if (!config.gra.weights.empty()) {
    if (config.gra.weights.size() != bm.size())
      throw Error(ErrorCode::ConfigError, "expected " + std::to_string(bm.size()) + " weights (one per benchmark column), got " +
                                              std::to_string(config.gra.weights.size()));
    bm.weights = config.gra.weights;
  }
  return bm;
}

IndicatorTable compute_indicators(const PipelineConfig& cfg, std::span<const IndicatorCatalog> catalogs) {
  IndicatorTable table;
  LoadResult loaded = in_stage("ingest", [&] { return load_records(cfg.input, cfg.policy); });
  const EventDataset& ds = loaded.dataset;
  table.event_id = ds.event_id;
  table.event_start = static_cast<double>(ds.start_time);
  table.log.push_back("ingest: " + std::to_string(loaded.valid_lines) + " of " + std::to_string(loaded.total_lines) +
                      " lines accepted from " + cfg.input.string());
  for (const auto& r : loaded.rejections)
    table.log.push_back("ingest: " + cfg.input.string() + ": line " + std::to_string(r.line) + ": " + r.reason);

  bool need_sentiment = false;
  for (const auto& c : catalogs) need_sentiment = need_sentiment || c.needs_sentiment();
  std::optional<RecordLabels> labels;
  if (need_sentiment || !cfg.model.empty() || !cfg.train_corpus.empty()) {
    labels = in_stage("sentiment", [&] { return sentiment::label_records(ds, obtain_model(cfg, &table.log)); });
  }

  const auto buckets = in_stage("indicators", [&] { return bucketize(ds, cfg.window_hours); });
  const TimeBucket origin = origin_bucket(ds);
  auto predecessor = [&](std::size_t i) -> const TimeBucket* {
    if (i > 0) return &buckets[i - 1];
    return cfg.rate_baseline == RateBaseline::Origin ? &origin : nullptr;
  };
  table.counts.resize(buckets.size());
  std::optional<SentimentCounts> origin_counts;
  if (labels) {
    for (std::size_t i = 0; i < buckets.size(); ++i) table.counts[i] = tally(buckets[i], *labels);
    origin_counts = tally(origin, *labels);
  }
  auto prev_counts = [&](std::size_t i) -> std::optional<SentimentCounts> {
    if (i > 0) return table.counts[i - 1];
    return cfg.rate_baseline == RateBaseline::Origin ? origin_counts : std::nullopt;
  };
  for (const auto& b : buckets) {
    table.bucket_start.push_back(b.start);
    table.bucket_end.push_back(b.end);
  }
  for (const auto& cat : catalogs) {
    table.vectors.push_back(in_stage("indicators", [&] {
      std::vector<IndicatorVector> out;
      for (std::size_t i = 0; i < buckets.size(); ++i)
        out.push_back(compute_vector(buckets[i], predecessor(i), cat, table.counts[i], prev_counts(i)));
      return out;
    }));
  }
  return table;
}

MonitorReport run_monitor(const PipelineConfig& cfg) {
  MonitorReport rep;
  rep.config = cfg.echo;
  rep.seed = cfg.seed;

  IndicatorCatalog catalog = in_stage("config", [&] { return IndicatorCatalog::parse(cfg.catalog); });
  std::vector<IndicatorCatalog> subsets;
  for (const auto& s : cfg.subsets) subsets.push_back(in_stage("config", [&] { return IndicatorCatalog::parse(s); }));
  rep.subset_names = cfg.subsets;

  std::vector<IndicatorCatalog> all = {catalog};
  all.insert(all.end(), subsets.begin(), subsets.end());
  IndicatorTable table = compute_indicators(cfg, all);
  rep.event_id = table.event_id;
  rep.event_start = table.event_start;
  rep.log = std::move(table.log);
  const std::vector<IndicatorVector>& vectors = table.vectors.front();

  if (cfg.select) {
    rep.selection = in_stage("selection", [&] {
      const IndicatorMatrix matrix = build_matrix(vectors, catalog);
      for (const auto& e : matrix.exclusions) rep.log.push_back("selection: " + e);
      return selection::select_catalog(matrix, catalog, cfg.selection);
    });
    catalog = rep.selection->final_catalog;
    std::string kept;
    for (const auto& c : catalog.codes()) kept += (kept.empty() ? "" : ",") + c;
    rep.log.push_back("selection: final catalog " + kept);
  }
  rep.catalog = catalog;

  rating::GraConfig gra = cfg.gra;
  gra.weights.clear();
  const rating::BenchmarkMatrix full = in_stage("rating", [&] {
    auto bm = obtain_benchmarks(cfg);
    gra.validate(bm.size());
    return bm;
  });
  auto restricted = [&](const IndicatorCatalog& cat, const std::string& name) {
    return in_stage("rating", [&] {
      std::vector<std::string> unmatched;
      auto bm = full.restrict_to(cat, &unmatched);
      for (const auto& u : unmatched)
        rep.log.push_back("rating: " + name + ": " + u + " has no benchmark column and is not rated");
      return bm;
    });
  };
  const rating::BenchmarkMatrix bm = restricted(catalog, cfg.catalog);
  rep.rated_codes = bm.codes();

  std::vector<rating::BenchmarkMatrix> subset_bms;
  std::vector<std::vector<IndicatorVector>> subset_vectors;
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    subset_bms.push_back(restricted(subsets[s], cfg.subsets[s]));
    subset_vectors.push_back(table.vectors[s + 1]);
  }

  in_stage("rating", [&] {
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      MonitorRow row;
      row.bucket = vectors[i].bucket_index();
      row.start = table.bucket_start[i];
      row.end = table.bucket_end[i];
      row.vector = vectors[i];
      row.counts = table.counts[i];
      try {
        row.assessment = rating::rate(vectors[i], bm, gra);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::IncompleteVector) throw;
        rep.log.push_back("rating: bucket " + std::to_string(row.bucket) + " skipped: " + e.detail());
        continue;
      }
      for (std::size_t s = 0; s < subsets.size(); ++s) {
        try {
          row.subset_levels.push_back(rating::rate(subset_vectors[s][i], subset_bms[s], gra).level);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::IncompleteVector) throw;
          row.subset_levels.push_back(std::nullopt);
        }
      }
      rep.rows.push_back(std::move(row));
    }
    if (rep.rows.empty()) throw Error(ErrorCode::NoCompleteRows, "no bucket of " + cfg.input.string() + " could be rated");
    return 0;
  });
  return rep;
}

std::string format_monitor_csv(const MonitorReport& report) {
  const bool with_counts = !report.rows.empty() && report.rows.front().counts.has_value();
  std::ostringstream out;
  out << "bucket,start,end";
  const auto codes = report.catalog.codes();
  for (const auto& c : codes) out << ',' << c;
  if (with_counts) out << ",positive,negative,neutral";
  out << ",gamma_1,gamma_2,gamma_3,gamma_4,level,label";
  for (const auto& s : report.subset_names) out << ",level_" << s;
  out << '\n';
  for (const auto& row : report.rows) {
    out << row.bucket << ',' << csv::format_number(row.start) << ',' << csv::format_number(row.end);
    for (const auto& c : codes) {
      out << ',';
      if (auto v = row.vector.get(c)) out << csv::format_number(*v);
    }
    if (with_counts) {
      const SentimentCounts sc = row.counts.value_or(SentimentCounts{});
      out << ',' << sc.positive << ',' << sc.negative << ',' << sc.neutral;
    }
    for (int i = 0; i < rating::kLevels; ++i) out << ',' << csv::format_number(row.assessment.gamma(i));
    out << ',' << row.assessment.level << ',' << row.assessment.label;
    for (const auto& level : row.subset_levels) {
      out << ',';
      if (level) out << *level;
    }
    out << '\n';
  }
  return out.str();
}

MonitorReport read_monitor_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open '" + path.string() + "'");
  auto fail = [&](std::size_t line, const std::string& what) {
    return Error(ErrorCode::SchemaViolation, path.string() + ": line " + std::to_string(line) + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line)) throw fail(1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = csv::split(line, ',');
  auto find = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto gamma1 = find("gamma_1");
  const auto level_col = find("level");
  const auto label_col = find("label");
  if (header.size() < 3 || header[0] != "bucket" || header[1] != "start" || header[2] != "end" || !gamma1 ||
      !level_col || !label_col)
    throw fail(1, "not a monitor table");
  const auto positive = find("positive");
  const std::size_t codes_end = positive ? *positive : *gamma1;

  MonitorReport rep;
  rep.event_id = path.stem().string();
  std::vector<std::string> codes(header.begin() + 3, header.begin() + static_cast<std::ptrdiff_t>(codes_end));
  rep.catalog = IndicatorCatalog::from_codes(codes);
  rep.rated_codes = codes;
  for (std::size_t k = *label_col + 1; k < header.size(); ++k) {
    if (header[k].rfind("level_", 0) != 0) throw fail(1, "unexpected column '" + header[k] + "'");
    rep.subset_names.push_back(header[k].substr(6));
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line, ',');
    if (f.size() != header.size()) throw fail(line_no, "expected " + std::to_string(header.size()) + " fields");
    try {
      MonitorRow row;
      row.bucket = static_cast<std::size_t>(csv::parse_number(f[0]));
      row.start = csv::parse_number(f[1]);
      row.end = csv::parse_number(f[2]);
      row.vector = IndicatorVector(row.bucket, codes);
      for (std::size_t k = 0; k < codes.size(); ++k)
        if (!f[3 + k].empty()) row.vector.set(codes[k], csv::parse_number(f[3 + k]));
      if (positive) {
        SentimentCounts c;
        c.positive = static_cast<std::uint64_t>(csv::parse_number(f[*positive]));
        c.negative = static_cast<std::uint64_t>(csv::parse_number(f[*positive + 1]));
        c.neutral = static_cast<std::uint64_t>(csv::parse_number(f[*positive + 2]));
        row.counts = c;
      }
      for (int i = 0; i < rating::kLevels; ++i) row.assessment.gamma(i) = csv::parse_number(f[*gamma1 + static_cast<std::size_t>(i)]);
      row.assessment.level = static_cast<int>(csv::parse_number(f[*level_col]));
      if (row.assessment.level < 1 || row.assessment.level > rating::kLevels) throw fail(line_no, "level out of range");
      row.assessment.label = f[*label_col];
      for (std::size_t k = *label_col + 1; k < f.size(); ++k)
        row.subset_levels.push_back(f[k].empty() ? std::nullopt
                                                 : std::optional<int>(static_cast<int>(csv::parse_number(f[k]))));
      rep.rows.push_back(std::move(row));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SchemaViolation) throw;
      throw fail(line_no, e.detail());
    }
  }
  if (rep.rows.empty()) throw Error(ErrorCode::EmptyDataset, path.string() + ": no rows");
  const MonitorRow& first = rep.rows.front();
  rep.event_start = first.start - static_cast<double>(first.bucket) * (first.end - first.start);
  return rep;
}

std::string sentiment_chart(const MonitorReport& report) {
  svg::LineChart chart;
  chart.title = "Sentiment of blogs and comments";
  chart.x_label = "hours since event start";
  chart.y_label = "cumulative count";
  chart.y_min = 0;
  svg::Series pos{"positive", {}, {}};
  svg::Series neg{"negative", {}, {}};
  svg::Series neu{"neutral", {}, {}};
  for (const auto& row : report.rows) {
    const double x = (row.end - report.event_start) / 3600.0;
    for (auto* s : {&pos, &neg, &neu}) s->x.push_back(x);
    if (row.counts) {
      pos.y.emplace_back(static_cast<double>(row.counts->positive));
      neg.y.emplace_back(static_cast<double>(row.counts->negative));
      neu.y.emplace_back(static_cast<double>(row.counts->neutral));
    } else {
      for (auto* s : {&pos, &neg, &neu}) s->y.emplace_back(std::nullopt);
    }
  }
  chart.series = {pos, neg, neu};
  return svg::render(chart);
}

std::string level_chart(const MonitorReport& report) {
  svg::LineChart chart;
  chart.title = "Crisis level (1 Giant .. 4 Light)";
  chart.x_label = "hours since event start";
  chart.y_label = "crisis level";
  chart.y_min = 1;
  chart.y_max = 4;
  chart.integer_ticks = true;
  chart.invert_y = true;
  svg::Series main{"catalog", {}, {}};
  std::vector<svg::Series> extra;
  for (const auto& s : report.subset_names) extra.push_back({s, {}, {}});
  for (const auto& row : report.rows) {
    const double x = (row.end - report.event_start) / 3600.0;
    main.x.push_back(x);
    main.y.emplace_back(static_cast<double>(row.assessment.level));
    for (std::size_t s = 0; s < extra.size(); ++s) {
      extra[s].x.push_back(x);
      const auto level = s < row.subset_levels.size() ? row.subset_levels[s] : std::nullopt;
      extra[s].y.push_back(level ? std::optional<double>(*level) : std::nullopt);
    }
  }
  chart.series.push_back(main);
  for (auto& s : extra) chart.series.push_back(std::move(s));
  return svg::render(chart);
}

std::vector<std::filesystem::path> render_report(const MonitorReport& report, bool csv, bool svg,
                                                 const std::filesystem::path& dir) {
  return in_stage("report", [&] {
    if (report.rows.empty()) throw Error(ErrorCode::InvalidArgument, "report has no rows");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const char* name, const std::string& content) {
      const std::filesystem::path path = dir / name;
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write '" + path.string() + "'");
      out << content;
      if (!out) throw Error(ErrorCode::OutputUnwritable, "write failed for '" + path.string() + "'");
      written.push_back(path);
    };
    if (csv) emit("monitor.csv", format_monitor_csv(report));
    if (svg) {
      emit("sentiment.svg", sentiment_chart(report));
      emit("levels.svg", level_chart(report));
    }
    if (csv && report.selection) {
      auto extra = selection::write_selection_reports(*report.selection, dir / "selection");
      written.insert(written.end(), extra.begin(), extra.end());
    }
    return written;
  });
}

void write_run_metadata(const MonitorReport& report, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["version"] = std::string(kVersion);
  j["seed"] = report.seed;
  j["event_id"] = report.event_id;
  j["rows"] = report.rows.size();
  j["catalog"] = report.catalog.codes();
  j["rated_codes"] = report.rated_codes;
  j["subsets"] = report.subset_names;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.config) config[k] = v;
  j["config"] = config;
  j["log"] = report.log;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write '" + path.string() + "'").with_stage("report");
  out << j.dump(2) << '\n';
}

}  // namespace crisis
