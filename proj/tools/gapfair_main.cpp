// gapfair: train multiclass linear text classifiers, apply debiasing
// interventions, and audit them with group-wise TPR/GAP satisfaction reports.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gapfair/corpus.hpp"
#include "gapfair/errors.hpp"
#include "gapfair/pipeline.hpp"
#include "gapfair/report.hpp"
#include "gapfair/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// FNV-1a 64, for input digests and run ids (integrity bookkeeping, not crypto).
std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gapfair::DataError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int thread_cap() {
  const char* env = std::getenv("GAPFAIR_THREADS");
  if (env == nullptr) return 1;
  const int v = std::atoi(env);
  return v >= 1 ? v : 1;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw gapfair::UsageError("bad seed value \"" + item + "\"");
    }
  }
  if (seeds.empty()) throw gapfair::UsageError("no seeds given");
  return seeds;
}

struct GlobalOpts {
  std::string out_dir = "out";
  bool verbose = false;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gapfair::DataError(path.string() + ": cannot open for writing");
  out << text;
}

int cmd_prepare(const GlobalOpts& global, const std::string& input, const std::string& format,
                const std::string& fractions, std::uint64_t seed, bool stratified,
                const std::string& stopword_file, bool keep_stopwords) {
  using namespace gapfair;
  const DatasetFormat fmt = [&] {
    if (format == "jsonl") return DatasetFormat::jsonl;
    if (format == "csv") return DatasetFormat::csv;
    throw UsageError("--format must be jsonl or csv");
  }();

  Dataset data = load_dataset(input, fmt);
  if (!keep_stopwords) {
    const auto stopwords =
        stopword_file.empty() ? default_stopwords() : load_stopwords(stopword_file);
    data = remove_stopwords(data, stopwords);
  }

  SplitSpec spec;
  {
    std::istringstream ss(fractions);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ','))
      throw UsageError("--split must look like 0.8,0.1,0.1");
    try {
      spec.train = std::stod(a);
      spec.dev = std::stod(b);
      spec.test = std::stod(c);
    } catch (const std::exception&) {
      throw UsageError("--split must be three numbers");
    }
  }
  spec.seed = seed;
  spec.stratified = stratified;
  const Splits splits = split(data, spec);

  fs::create_directories(global.out_dir);
  save_dataset_jsonl(splits.train, (fs::path(global.out_dir) / "train.jsonl").string());
  save_dataset_jsonl(splits.dev, (fs::path(global.out_dir) / "dev.jsonl").string());
  save_dataset_jsonl(splits.test, (fs::path(global.out_dir) / "test.jsonl").string());

  json manifest;
  manifest["tool_version"] = kVersion;
  manifest["command"] = "prepare";
  manifest["input"] = {{"path", input}, {"fnv1a64", hex64(fnv1a64(read_file_bytes(input)))}};
  manifest["split"] = {{"train", spec.train}, {"dev", spec.dev},   {"test", spec.test},
                       {"seed", spec.seed},   {"stratified", spec.stratified}};
  manifest["filter_stopwords"] = !keep_stopwords;
  manifest["stopword_file"] = stopword_file.empty() ? "<builtin>" : stopword_file;
  manifest["sizes"] = {{"train", splits.train.size()},
                       {"dev", splits.dev.size()},
                       {"test", splits.test.size()}};
  write_text(fs::path(global.out_dir) / "manifest.json", manifest.dump(2) + "\n");

  if (global.verbose) {
    std::cout << "prepared " << data.size() << " examples -> " << splits.train.size() << "/"
              << splits.dev.size() << "/" << splits.test.size() << " under " << global.out_dir
              << "\n";
  }
  return 0;
}

int cmd_run(const GlobalOpts& global, const std::string& config_path, const std::string& seeds_csv) {
  using namespace gapfair;
  const std::string config_bytes = read_file_bytes(config_path);
  const ExperimentConfig config = load_experiment_config(config_path);
  const std::vector<std::uint64_t> seeds = parse_seeds(seeds_csv);

  const ExperimentResult result = run_experiment(config, seeds, thread_cap());

  // Run id from config bytes + seeds: reruns land in the same directory with
  // byte-identical outputs.
  std::string id_material = config_bytes;
  for (std::uint64_t s : seeds) id_material += "|" + std::to_string(s);
  const std::string run_id = hex64(fnv1a64(id_material));
  const fs::path run_dir = fs::path(global.out_dir) / run_id;
  fs::create_directories(run_dir);

  const std::string method = config.debiased.name;
  write_report_json(result.mean_report, (run_dir / (method + ".json")).string());
  write_report_csv(result.mean_report, (run_dir / (method + ".csv")).string());
  write_report_markdown(result.mean_report, &result.aggregates, method,
                        (run_dir / (method + ".md")).string());
  write_report_svg(result.mean_report, (run_dir / (method + ".svg")).string());
  write_aggregates_json(result.aggregates, (run_dir / "aggregates.json").string());

  json manifest = json::parse(result.manifest_json);
  manifest["command"] = "run";
  manifest["run_id"] = run_id;
  manifest["config"] = {{"path", config_path}, {"fnv1a64", hex64(fnv1a64(config_bytes))}};
  if (config.source == ExperimentConfig::Source::file) {
    manifest["input"] = {{"path", config.data_path},
                         {"fnv1a64", hex64(fnv1a64(read_file_bytes(config.data_path)))}};
  }
  write_text(run_dir / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "run " << run_id << " (" << method << ", " << seeds.size() << " seeds)\n";
  const auto show = [&](const std::string& key, const std::string& label) {
    auto it = result.aggregates.find(key);
    if (it == result.aggregates.end()) return;
    const RunAggregate& a = it->second;
    std::printf("  %-12s %8.2f -> %8.2f  (p=%.4f%s)\n", label.c_str(), a.baseline_mean, a.mean,
                a.p, a.significant ? ", significant" : "");
  };
  show("accuracy", "accuracy");
  show("gap_rms", "gap_rms");
  for (const auto& [key, _] : result.aggregates) {
    if (key.rfind("tpr:", 0) == 0 && key.find(':', 4) == std::string::npos) show(key, key);
  }
  std::printf("  base satisfaction %.0f%% unweighted / %.0f%% weighted; advanced %.0f%% / %.0f%%\n",
              100.0 * result.mean_report.unweighted_base_rate,
              100.0 * result.mean_report.weighted_base_rate,
              100.0 * result.mean_report.unweighted_advanced_rate,
              100.0 * result.mean_report.weighted_advanced_rate);
  std::printf("  worsened GAP: %d/%d classes\n", result.mean_report.worsened_gap_count,
              result.mean_report.judged_class_count);
  std::cout << "outputs under " << run_dir.string() << "\n";
  return 0;
}

int cmd_replay(const GlobalOpts& global, const std::string& fixture, double epsilon_gap,
               double epsilon_harm) {
  using namespace gapfair;
  const PaperTable table = load_paper_table(fixture);
  const ReplayReport replay = replay_paper_table(table, epsilon_gap, epsilon_harm);

  fs::create_directories(global.out_dir);
  const fs::path out = fs::path(global.out_dir) / (table.method + "_replay.json");
  write_replay_json(replay, out.string());

  std::printf("replay %s: %zu classes\n", table.method.c_str(), table.rows.size());
  std::printf("  base satisfied      %d\n", replay.base_count);
  std::printf("  advanced satisfied  %d\n", replay.advanced_count);
  std::printf("  worsened GAP        %d/%d (%.0f%%)\n", replay.comparison.worsened_gap_count,
              replay.comparison.judged_class_count,
              100.0 * replay.comparison.worsened_gap_fraction);
  std::printf("  gap_rms             %.2f -> %.2f\n", replay.rms_orig, replay.rms_deb);
  if (replay.verdict_diff.empty()) {
    std::printf("  verdicts match the published flags on every row\n");
  } else {
    std::printf("  %zu verdict disagreements vs published flags:\n", replay.verdict_diff.size());
    for (const auto& d : replay.verdict_diff) {
      std::printf("    %-20s computed base=%d advanced=%d, published base=%d advanced=%d\n",
                  d.class_name.c_str(), d.computed_base, d.computed_advanced, d.flag_base,
                  d.flag_advanced);
    }
  }
  std::cout << "report written to " << out.string() << "\n";
  return 0;
}

int cmd_report(const GlobalOpts& global, const std::string& input, const std::string& formats_csv,
               const std::string& method) {
  using namespace gapfair;
  const ComparisonReport report = [&]() -> ComparisonReport {
    if (input.size() >= 4 && input.substr(input.size() - 4) == ".csv")
      return read_report_csv(input);
    return read_report_json(input);
  }();

  std::map<std::string, RunAggregate> aggregates;
  const fs::path agg_path = fs::path(input).parent_path() / "aggregates.json";
  if (fs::exists(agg_path)) aggregates = read_aggregates_json(agg_path.string());

  fs::create_directories(global.out_dir);
  const std::string stem = fs::path(input).stem().string();
  std::istringstream ss(formats_csv);
  std::string fmt;
  while (std::getline(ss, fmt, ',')) {
    const fs::path out = fs::path(global.out_dir) / (stem + "." + (fmt == "svg_bars" ? "svg" : fmt));
    if (fmt == "json") {
      write_report_json(report, out.string());
    } else if (fmt == "csv") {
      write_report_csv(report, out.string());
    } else if (fmt == "md" || fmt == "markdown") {
      write_report_markdown(report, aggregates.empty() ? nullptr : &aggregates, method,
                            (fs::path(global.out_dir) / (stem + ".md")).string());
    } else if (fmt == "svg" || fmt == "svg_bars") {
      write_report_svg(report, out.string());
    } else {
      throw UsageError("unknown format \"" + fmt + "\" (expected json, csv, md, svg)");
    }
    std::cout << "wrote " << (fmt == "md" || fmt == "markdown"
                                  ? (fs::path(global.out_dir) / (stem + ".md")).string()
                                  : out.string())
              << "\n";
  }
  return 0;
}

}  // namespace

namespace {

int run_main(int argc, char** argv) {
  CLI::App app{"group-wise fairness auditing for debiased text classifiers"};
  app.set_version_flag("--version", gapfair::kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may appear after the subcommand

  GlobalOpts global;
  app.add_option("--out-dir", global.out_dir, "output directory")->capture_default_str();
  app.add_flag("--verbose", global.verbose, "chatty progress output");

  auto* prepare = app.add_subcommand("prepare", "tokenize, filter stopwords and split a dataset");
  std::string prep_input, prep_format = "jsonl", prep_split = "0.8,0.1,0.1", prep_stop;
  std::uint64_t prep_seed = 0;
  bool prep_no_strat = false, prep_keep_stop = false;
  prepare->add_option("--input", prep_input, "dataset file")->required();
  prepare->add_option("--format", prep_format, "jsonl or csv")->capture_default_str();
  prepare->add_option("--split", prep_split, "train,dev,test fractions")->capture_default_str();
  prepare->add_option("--seed", prep_seed, "split seed")->capture_default_str();
  prepare->add_flag("--no-stratify", prep_no_strat, "plain random split");
  prepare->add_option("--stopwords", prep_stop, "stopword file (default: built-in list)");
  prepare->add_flag("--keep-stopwords", prep_keep_stop, "skip stopword filtering");

  auto* run = app.add_subcommand("run", "run baseline + debiased pipelines across seeds");
  std::string run_config, run_seeds = "1,2,3,4,5";
  run->add_option("--config", run_config, "experiment config file")->required();
  run->add_option("--seeds", run_seeds, "comma-separated run seeds")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "recompute aggregate metrics from a results fixture");
  std::string replay_fixture;
  double replay_eps_gap = 0.0, replay_eps_harm = 0.0;
  replay->add_option("--fixture", replay_fixture, "fixture CSV")->required();
  replay->add_option("--epsilon-gap", replay_eps_gap, "gap-decrease tolerance")
      ->capture_default_str();
  replay->add_option("--epsilon-harm", replay_eps_harm, "no-harm tolerance")
      ->capture_default_str();

  auto* report = app.add_subcommand("report", "re-render a saved comparison report");
  std::string report_input, report_formats = "md,svg", report_method = "debiased";
  report->add_option("--input", report_input, "comparison .json or .csv")->required();
  report->add_option("--formats", report_formats, "comma list: json,csv,md,svg")
      ->capture_default_str();
  report->add_option("--method", report_method, "method column label")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (prepare->parsed()) {
      return cmd_prepare(global, prep_input, prep_format, prep_split, prep_seed, !prep_no_strat,
                         prep_stop, prep_keep_stop);
    }
    if (run->parsed()) return cmd_run(global, run_config, run_seeds);
    if (replay->parsed()) return cmd_replay(global, replay_fixture, replay_eps_gap, replay_eps_harm);
    if (report->parsed()) return cmd_report(global, report_input, report_formats, report_method);
    return static_cast<int>(gapfair::ExitCode::usage);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(gapfair::ExitCode::usage);
  } catch (const gapfair::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(gapfair::ExitCode::usage);
  } catch (const gapfair::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return static_cast<int>(gapfair::ExitCode::numerical);
  } catch (const gapfair::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(gapfair::ExitCode::data);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(gapfair::ExitCode::data);
  }
}

}  // namespace

int main(int argc, char** argv) noexcept {
  try {
    return run_main(argc, argv);
  } catch (...) {
    std::fputs("fatal: unexpected error\n", stderr);
    return static_cast<int>(gapfair::ExitCode::data);
  }
}
