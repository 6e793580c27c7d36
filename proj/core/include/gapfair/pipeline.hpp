#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gapfair/classifier.hpp"
#include "gapfair/config_file.hpp"
#include "gapfair/corpus.hpp"
#include "gapfair/debias.hpp"
#include "gapfair/features.hpp"
#include "gapfair/metrics.hpp"
#include "gapfair/stats.hpp"

namespace gapfair {

enum class StageKind { cda, inlp, decoupled, eo };

std::string to_string(StageKind kind);
StageKind stage_kind_from(const std::string& name);

enum class FeaturizerKind { counts, tfidf, embeddings };

struct CdaConfig {
  SwapLexicon lexicon;
  bool flip_group = true;
  bool use_marker_lexicon = false;  // synthetic data: pair g0m*/g1m* markers
};

struct EoConfig {
  EoFallback fallback = EoFallback::second_best;
  std::string abstain_class_name;  // when fallback == abstain_class
};

// One debiasing pipeline: stages execute in the canonical order
// cda -> featurize -> inlp -> train/decoupled -> eo. A stage list that is out
// of order, repeats a kind, or combines cda with precomputed embeddings is
// rejected.
struct PipelineConfig {
  std::string name = "baseline";
  std::vector<StageKind> stages;
  FeaturizerKind featurizer = FeaturizerKind::tfidf;
  std::int64_t min_df = 2;
  std::int64_t max_features = 50000;
  bool filter_stopwords = true;  // applied after CDA so gendered stopwords still swap
  std::string stopword_file;     // empty = built-in default list
  SplitSpec split;
  TrainConfig train;
  CdaConfig cda;
  InlpParams inlp;
  EoConfig eo;

  bool has_stage(StageKind kind) const;
  void validate() const;
};

struct PipelineResult {
  std::optional<LinearModel> model;
  std::optional<DecoupledModel> decoupled;
  std::optional<Projection> projection;
  std::optional<EoPolicy> eo_policy;
  std::vector<int> test_predictions;
  std::vector<int> test_labels;
  std::vector<int> test_groups;
  EvalResult test_eval;
  std::vector<std::int64_t> test_class_populations;
  std::string manifest_json;  // every stage parameter and derived seed
};

// Executes one seeded pipeline over a raw (untokenized-stopword) dataset.
// `embeddings`, when present, must align row-for-row with `raw` and replaces
// the internal featurizer.
PipelineResult run_pipeline(const Dataset& raw, const PipelineConfig& config,
                            std::uint64_t seed,
                            const FeatureMatrix* embeddings = nullptr);

// Scalar metrics of one run: accuracy, gap_rms, per-group TPR, per-class
// TPR/gap. Names: "accuracy", "gap_rms", "tpr:<group>", "tpr:<class>:<group>",
// "gap:<class>".
MetricMap metrics_from(const EvalResult& eval);

// Data source + baseline/debiased pipeline pair parsed from one config file.
struct ExperimentConfig {
  enum class Source { file, synthetic };
  Source source = Source::synthetic;
  std::string data_path;
  DatasetFormat data_format = DatasetFormat::jsonl;
  std::string embeddings_path;
  SyntheticConfig synthetic;
  PipelineConfig baseline;  // same featurizer/split/train, no stages
  PipelineConfig debiased;
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from(const ConfigFile& file);

struct ExperimentResult {
  std::vector<std::uint64_t> seeds;
  std::map<std::string, RunAggregate> aggregates;
  ComparisonReport mean_report;  // seed-averaged before/after evaluation
  std::vector<EvalResult> baseline_evals;
  std::vector<EvalResult> debiased_evals;
  std::string manifest_json;
};

// The repeated-runs protocol: run baseline and debiased once per seed,
// aggregate metrics with Welch tests, and build a comparison of the averaged
// evaluations (TPR cells averaged per run; gap cells averaged as unsigned
// per-run gaps; gap_rms averaged from per-run values).
ExperimentResult run_experiment(const ExperimentConfig& config,
                                std::span<const std::uint64_t> seeds, int threads = 1);

// Mean of per-run evaluations; supports are summed, gaps averaged unsigned.
EvalResult average_eval_results(const std::vector<EvalResult>& runs);

}  // namespace gapfair
