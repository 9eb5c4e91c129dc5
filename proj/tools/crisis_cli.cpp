#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crisis/csv.hpp"
#include "crisis/error.hpp"
#include "crisis/event_store.hpp"
#include "crisis/indicators.hpp"
#include "crisis/pipeline.hpp"
#include "crisis/rating.hpp"
#include "crisis/selection.hpp"
#include "crisis/sentiment.hpp"
#include "crisis/synth.hpp"

namespace fs = std::filesystem;
using namespace crisis;

namespace {

// Config keys exposed as --<key> flags on subcommands that accept a config.
struct KeyFlags {
  std::map<std::string, std::string> values;

  void add_to(CLI::App* app, const std::vector<std::string>& keys = {}) {
    for (const auto& k : config_keys()) {
      if (!keys.empty() && std::find(keys.begin(), keys.end(), k.key) == keys.end()) continue;
      std::string help = std::string(k.help) + " [" + k.section + "]";
      if (*k.default_value) help += " (default " + std::string(k.default_value) + ")";
      app->add_option(std::string("--") + k.key, values[k.key], help);
    }
  }

  Overrides overrides(const CLI::App* app) const {
    Overrides out;
    for (const auto& [key, value] : values)
      if (app->count("--" + key) > 0) out.emplace_back(key, value);
    return out;
  }
};

void write_text(const std::string& content, const std::optional<fs::path>& path) {
  if (!path) {
    std::cout << content;
    return;
  }
  std::ofstream out(*path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write '" + path->string() + "'");
  out << content;
}

int cmd_ingest(const fs::path& input, const std::string& policy, const std::optional<fs::path>& output) {
  const LoadPolicy p = policy == "lenient" ? LoadPolicy::Lenient : LoadPolicy::Strict;
  LoadResult r = [&] {
    try {
      return load_records(input, p);
    } catch (const Error& e) {
      throw e.with_stage("ingest");
    }
  }();
  const auto& ds = r.dataset;
  std::cout << "event " << ds.event_id << ", start " << ds.start_time << "\n";
  std::cout << "blogs " << ds.blogs.size() << ", comments " << ds.comments.size() << ", snapshots "
            << ds.snapshots.size() << "\n";
  std::cout << "lines " << r.total_lines << ", accepted " << r.valid_lines << ", rejected " << r.rejections.size()
            << "\n";
  if (!r.rejections.empty()) std::cout << format_rejections(r.rejections);
  const ValidationReport report = validate(ds);
  std::cout << "validation findings " << report.findings.size() << "\n";
  for (const auto& f : report.findings) std::cout << "  " << f.message << "\n";
  if (output) save_records(ds, *output);
  return 0;
}

int cmd_indicators(const std::optional<fs::path>& config, const Overrides& overrides, const std::optional<fs::path>& output) {
  const PipelineConfig cfg = load_config(config, overrides);
  const IndicatorCatalog catalog = IndicatorCatalog::parse(cfg.catalog);
  const IndicatorTable table = compute_indicators(cfg, std::span<const IndicatorCatalog>(&catalog, 1));
  for (const auto& line : table.log) std::cerr << line << "\n";
  write_text(format_indicator_csv(table.vectors.front()), output);
  return 0;
}

int cmd_train(const fs::path& corpus_path, const fs::path& output, sentiment::Hyperparams hp,
              const std::optional<fs::path>& test_path, double split, const std::optional<fs::path>& pretrained_path,
              const std::optional<fs::path>& lexicon_path) {
  auto corpus = sentiment::read_corpus(corpus_path);
  std::vector<sentiment::LabeledExample> test;
  if (test_path) {
    test = sentiment::read_corpus(*test_path);
  } else if (split > 0) {
    auto parts = sentiment::split_corpus(corpus, 1.0 - split, hp.seed);
    corpus = std::move(parts.train);
    test = std::move(parts.test);
  }
  std::optional<sentiment::PretrainedEmbeddings> pretrained;
  if (pretrained_path) pretrained = sentiment::read_pretrained(*pretrained_path);
  const auto result = sentiment::train(corpus, hp, pretrained ? &*pretrained : nullptr);
  sentiment::save_model(result.model, output);
  std::printf("trained on %zu examples, %zu epochs, final loss %.6f, training accuracy %.2f%%\n", corpus.size(),
              result.loss_history.size(), result.loss_history.back(), 100 * result.accuracy_history.back());
  if (!test.empty()) {
    std::cout << "model\tprecision\trecall\tF1\n";
    std::cout << sentiment::format_table_row("LSTM", sentiment::evaluate(result.model, test)) << "\n";
    if (lexicon_path) {
      const auto lexicon = sentiment::read_lexicon(*lexicon_path);
      const auto report = sentiment::evaluate_with(
          [&](std::string_view text) { return sentiment::lexicon_classify(text, lexicon); }, test);
      std::cout << sentiment::format_table_row("Lexicon", report) << "\n";
    }
  }
  return 0;
}

int cmd_classify(const fs::path& model_path, const std::vector<std::string>& texts,
                 const std::optional<fs::path>& corpus_path) {
  const auto model = sentiment::load_model(model_path);
  for (const auto& text : texts) {
    const auto p = sentiment::predict_proba(text, model);
    const int cls = sentiment::argmax(p);
    std::printf("%s\t%.6f\t%.6f\t%.6f\t%s\n", std::string(sentiment::label_tag(cls)).c_str(), p[0], p[1], p[2],
                text.c_str());
  }
  if (corpus_path) {
    const auto corpus = sentiment::read_corpus(*corpus_path);
    const auto report = sentiment::evaluate(model, corpus);
    std::cout << "model\tprecision\trecall\tF1\n" << sentiment::format_table_row("LSTM", report) << "\n";
    std::printf("accuracy %.2f%% over %zu examples\n", 100 * report.accuracy, report.total);
  }
  return 0;
}

int cmd_select(const fs::path& indicators, const std::string& catalog_spec, const selection::SelectionConfig& config,
               const fs::path& output_dir) {
  const auto vectors = read_indicator_csv(indicators);
  IndicatorCatalog catalog;
  if (catalog_spec.empty()) {
    if (vectors.empty()) throw Error(ErrorCode::EmptyDataset, indicators.string() + ": no rows");
    catalog = IndicatorCatalog::from_codes(vectors.front().codes());
  } else {
    catalog = IndicatorCatalog::parse(catalog_spec);
  }
  const IndicatorMatrix matrix = build_matrix(vectors, catalog);
  for (const auto& e : matrix.exclusions) std::cerr << e << "\n";
  const auto result = selection::select_catalog(matrix, catalog, config);
  selection::write_selection_reports(result, output_dir);
  std::cout << selection::format_selection_text(result);
  return 0;
}

int cmd_rate(const fs::path& indicators, const std::optional<fs::path>& config, const Overrides& overrides,
             const std::optional<fs::path>& output) {
  Overrides ov = overrides;
  // `rate` works on an indicator table; the record input is irrelevant.
  ov.emplace_back("input", indicators.string());
  const PipelineConfig cfg = load_config(config, ov);
  const auto vectors = read_indicator_csv(indicators);
  rating::BenchmarkMatrix bm = obtain_benchmarks(cfg);
  rating::GraConfig gra = cfg.gra;
  gra.weights.clear();
  if (!vectors.empty()) {
    std::vector<std::string> unmatched;
    bm = bm.restrict_to(IndicatorCatalog::from_codes(vectors.front().codes()), &unmatched);
    for (const auto& u : unmatched) std::cerr << "rating: " << u << " has no benchmark column and is not rated\n";
  }
  std::vector<rating::RatedBucket> rows;
  for (const auto& v : vectors) {
    try {
      rows.push_back({v.bucket_index(), rating::rate(v, bm, gra)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IncompleteVector) throw;
      std::cerr << indicators.string() << ": bucket " << v.bucket_index() << " skipped: " << e.detail() << "\n";
    }
  }
  write_text(rating::format_assessment_csv(rows), output);
  return 0;
}

int cmd_monitor(const std::optional<fs::path>& config, const Overrides& overrides) {
  const PipelineConfig cfg = load_config(config, overrides);
  const MonitorReport report = run_monitor(cfg);
  for (const auto& line : report.log) std::cerr << line << "\n";
  const auto files = render_report(report, cfg.write_csv, cfg.write_svg, cfg.output_dir);
  write_run_metadata(report, cfg.output_dir / "run.json");
  std::cout << report.rows.size() << " buckets rated\n";
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  std::cout << "wrote " << (cfg.output_dir / "run.json").string() << "\n";
  return 0;
}

int cmd_report(const fs::path& monitor_csv, const fs::path& output_dir, const std::string& formats) {
  const MonitorReport report = [&] {
    try {
      return read_monitor_csv(monitor_csv);
    } catch (const Error& e) {
      throw e.with_stage("report");
    }
  }();
  const bool csv = formats.find("csv") != std::string::npos;
  const bool svg = formats.find("svg") != std::string::npos;
  for (const auto& f : render_report(report, csv, svg, output_dir)) std::cout << "wrote " << f.string() << "\n";
  return 0;
}

int cmd_synth(const synth::SynthConfig& config, const fs::path& output, const fs::path& manifest) {
  const auto result = synth::generate(config);
  save_records(result.dataset, output);
  synth::write_manifest(result.manifest, manifest);
  std::cout << "wrote " << result.dataset.blogs.size() << " blogs, " << result.dataset.comments.size()
            << " comments, " << result.dataset.snapshots.size() << " snapshots to " << output.string() << "\n";
  std::cout << "wrote manifest (" << result.manifest.bucket_count << " buckets) to " << manifest.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online public opinion crisis monitor"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "Load and validate an event record file");
  fs::path ingest_input;
  std::string ingest_policy = "strict";
  std::optional<fs::path> ingest_output;
  ingest->add_option("--input", ingest_input, "event record file (JSONL)")->required();
  ingest->add_option("--policy", ingest_policy, "strict or lenient")->check(CLI::IsMember({"strict", "lenient"}));
  ingest->add_option("--output", ingest_output, "write the accepted records, sorted, to this file");

  auto* indicators = app.add_subcommand("indicators", "Compute per-bucket indicator vectors");
  std::optional<fs::path> ind_config;
  std::optional<fs::path> ind_output;
  KeyFlags ind_flags;
  indicators->add_option("--config", ind_config, "pipeline config file");
  indicators->add_option("--output", ind_output, "indicator CSV (stdout when omitted)");
  ind_flags.add_to(indicators, {"input", "window_hours", "policy", "catalog", "model", "train_corpus", "embed_dim",
                                "hidden_size", "learning_rate", "epochs", "batch_size", "rate_baseline", "seed"});

  auto* train = app.add_subcommand("train-sentiment", "Train the LSTM sentiment classifier");
  fs::path train_corpus;
  fs::path train_output;
  sentiment::Hyperparams hp;
  std::optional<fs::path> train_test;
  std::optional<fs::path> train_pretrained;
  std::optional<fs::path> train_lexicon;
  double train_split = 0;
  train->add_option("--corpus", train_corpus, "labelled corpus, label<TAB>text per line")->required();
  train->add_option("--output", train_output, "model file to write")->required();
  train->add_option("--embed_dim", hp.embed_dim, "embedding width")->capture_default_str();
  train->add_option("--hidden_size", hp.hidden_size, "LSTM hidden width")->capture_default_str();
  train->add_option("--learning_rate", hp.learning_rate, "SGD learning rate")->capture_default_str();
  train->add_option("--epochs", hp.epochs, "training epochs")->capture_default_str();
  train->add_option("--batch_size", hp.batch_size, "mini-batch size, 0 for full batch")->capture_default_str();
  train->add_option("--clip_norm", hp.clip_norm, "gradient norm clip, 0 disables")->capture_default_str();
  train->add_option("--min_count", hp.min_count, "minimum token frequency for the vocabulary")->capture_default_str();
  train->add_option("--seed", hp.seed, "random seed")->capture_default_str();
  train->add_flag("--stop_at_full_accuracy", hp.stop_at_full_accuracy, "stop once training accuracy reaches 100%");
  train->add_option("--test", train_test, "held-out labelled corpus; prints precision/recall/F1");
  train->add_option("--split", train_split, "hold out this fraction of the corpus as test set (0 disables)")
      ->check(CLI::Range(0.0, 0.99));
  train->add_option("--pretrained", train_pretrained, "pretrained embeddings ('<count> <dim>' header)");
  train->add_option("--lexicon", train_lexicon, "lexicon ('token score' lines) evaluated as a baseline");

  auto* classify = app.add_subcommand("classify", "Classify texts with a trained model");
  fs::path cls_model;
  std::vector<std::string> cls_texts;
  std::optional<fs::path> cls_corpus;
  classify->add_option("--model", cls_model, "model file")->required();
  classify->add_option("--text", cls_texts, "text to classify (repeatable)");
  classify->add_option("--corpus", cls_corpus, "labelled corpus to evaluate");

  auto* select = app.add_subcommand("select-indexes", "Correlation pruning and PCA over an indicator table");
  fs::path sel_input;
  std::string sel_catalog;
  fs::path sel_output = "selection";
  selection::SelectionConfig sel_config;
  bool sel_whole = false;
  select->add_option("--indicators", sel_input, "indicator CSV")->required();
  select->add_option("--catalog", sel_catalog, "catalog to analyse (default: the table's columns)");
  select->add_option("--corr_threshold", sel_config.corr_threshold, "redundancy threshold on |R_s|")
      ->capture_default_str();
  select->add_option("--cum_threshold", sel_config.cum_threshold, "cumulative contribution threshold")
      ->capture_default_str();
  select->add_flag("--whole", sel_whole, "analyse the whole catalog as one group");
  select->add_option("--output_dir", sel_output, "report directory")->capture_default_str();

  auto* rate = app.add_subcommand("rate", "Grey relational rating of an indicator table");
  fs::path rate_input;
  std::optional<fs::path> rate_config;
  std::optional<fs::path> rate_output;
  KeyFlags rate_flags;
  rate->add_option("--indicators", rate_input, "indicator CSV")->required();
  rate->add_option("--config", rate_config, "pipeline config file (rating section used)");
  rate->add_option("--output", rate_output, "assessment CSV (stdout when omitted)");
  rate_flags.add_to(rate, {"benchmarks", "rho", "normalization", "weights"});

  auto* monitor = app.add_subcommand("monitor", "Run the full pipeline and write reports");
  std::optional<fs::path> mon_config;
  KeyFlags mon_flags;
  monitor->add_option("--config", mon_config, "pipeline config file");
  mon_flags.add_to(monitor);

  auto* report = app.add_subcommand("report", "Render charts from a monitor table");
  fs::path rep_input;
  fs::path rep_output = "out";
  std::string rep_formats = "svg";
  report->add_option("--input", rep_input, "monitor.csv written by 'monitor'")->required();
  report->add_option("--output_dir", rep_output, "report directory")->capture_default_str();
  report->add_option("--formats", rep_formats, "comma-separated subset of csv,svg")->capture_default_str();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic event corpus and its manifest");
  synth::SynthConfig synth_config;
  fs::path synth_output;
  fs::path synth_manifest;
  synth_cmd->add_option("--output", synth_output, "record file to write")->required();
  synth_cmd->add_option("--manifest", synth_manifest, "ground-truth manifest to write")->required();
  synth_cmd->add_option("--seed", synth_config.seed, "random seed")->capture_default_str();
  synth_cmd->add_option("--hours", synth_config.hours, "event duration in hours")->capture_default_str();
  synth_cmd->add_option("--window_hours", synth_config.manifest_window_hours, "manifest bucket width")
      ->capture_default_str();
  synth_cmd->add_option("--event_id", synth_config.event_id, "event identifier")->capture_default_str();
  synth_cmd->add_option("--start", synth_config.start, "event start, UTC seconds")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code_for(ErrorCode::ConfigError);
  }

  try {
    if (*ingest) return cmd_ingest(ingest_input, ingest_policy, ingest_output);
    if (*indicators) return cmd_indicators(ind_config, ind_flags.overrides(indicators), ind_output);
    if (*train)
      return cmd_train(train_corpus, train_output, hp, train_test, train_split, train_pretrained, train_lexicon);
    if (*classify) return cmd_classify(cls_model, cls_texts, cls_corpus);
    if (*select) {
      sel_config.per_group = !sel_whole;
      sel_config.validate();
      return cmd_select(sel_input, sel_catalog, sel_config, sel_output);
    }
    if (*rate) return cmd_rate(rate_input, rate_config, rate_flags.overrides(rate), rate_output);
    if (*monitor) return cmd_monitor(mon_config, mon_flags.overrides(monitor));
    if (*report) return cmd_report(rep_input, rep_output, rep_formats);
    if (*synth_cmd) return cmd_synth(synth_config, synth_output, synth_manifest);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
