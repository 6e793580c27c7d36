#include "gapfair/pipeline.hpp"

#include <cmath>

#include "doctest.h"
#include "gapfair/errors.hpp"

#include <json.hpp>

using namespace gapfair;

namespace {

SyntheticConfig small_biased(int n = 1200) {
  SyntheticConfig cfg;
  cfg.class_count = 3;
  cfg.group_count = 2;
  cfg.n = n;
  cfg.bias = 0.4;
  cfg.cell_rates = {3, 1, 1, 3, 2, 2};
  cfg.seed = 404;
  return cfg;
}

PipelineConfig quick_pipeline() {
  PipelineConfig cfg;
  cfg.min_df = 1;
  cfg.train.epochs = 12;
  cfg.inlp.guard.epochs = 10;
  cfg.inlp.max_iters = 8;
  return cfg;
}

}  // namespace

TEST_CASE("an empty stage list is the plain baseline and is deterministic") {
  const Dataset data = generate_synthetic(small_biased());
  PipelineConfig cfg = quick_pipeline();
  const PipelineResult a = run_pipeline(data, cfg, 7);
  const PipelineResult b = run_pipeline(data, cfg, 7);
  CHECK(a.test_predictions == b.test_predictions);
  CHECK(a.manifest_json == b.manifest_json);
  CHECK(a.model.has_value());
  CHECK_FALSE(a.projection.has_value());
  CHECK_FALSE(a.eo_policy.has_value());
  CHECK(a.test_eval.accuracy > 50.0);  // class words make the task learnable

  const PipelineResult c = run_pipeline(data, cfg, 8);
  CHECK(a.test_predictions != c.test_predictions);  // seed matters

  const auto manifest = nlohmann::json::parse(a.manifest_json);
  CHECK(manifest["pipeline"] == "baseline");
  CHECK(manifest["stages"].empty());
  CHECK(manifest["seed"] == 7);
}

TEST_CASE("cda + inlp composes in canonical order") {
  const SyntheticConfig syn = small_biased();
  const Dataset data = generate_synthetic(syn);
  PipelineConfig cfg = quick_pipeline();
  cfg.name = "cda_inlp";
  cfg.stages = {StageKind::cda, StageKind::inlp};
  cfg.cda.lexicon = marker_lexicon(syn);
  const PipelineResult r = run_pipeline(data, cfg, 3);
  CHECK(r.projection.has_value());
  const auto manifest = nlohmann::json::parse(r.manifest_json);
  CHECK(manifest["stages"] == nlohmann::json::array({"cda", "inlp"}));
  CHECK(manifest.contains("cda"));
  CHECK(manifest.contains("inlp"));
}

TEST_CASE("every single-stage pipeline runs") {
  const SyntheticConfig syn = small_biased();
  const Dataset data = generate_synthetic(syn);
  for (StageKind kind :
       {StageKind::cda, StageKind::inlp, StageKind::decoupled, StageKind::eo}) {
    PipelineConfig cfg = quick_pipeline();
    cfg.name = to_string(kind);
    cfg.stages = {kind};
    if (kind == StageKind::cda) cfg.cda.lexicon = marker_lexicon(syn);
    const PipelineResult r = run_pipeline(data, cfg, 12);
    CHECK(r.test_predictions.size() == r.test_labels.size());
    CHECK((kind == StageKind::decoupled ? r.decoupled.has_value() : r.model.has_value()));
    if (kind == StageKind::eo) CHECK(r.eo_policy.has_value());
  }
}

TEST_CASE("invalid stage compositions are rejected") {
  PipelineConfig cfg = quick_pipeline();
  SUBCASE("out of canonical order") {
    cfg.stages = {StageKind::inlp, StageKind::cda};
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("canonical order"), DataError);
  }
  SUBCASE("duplicate stage") {
    cfg.stages = {StageKind::inlp, StageKind::inlp};
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("twice"), DataError);
  }
  SUBCASE("cda on precomputed embeddings") {
    cfg.stages = {StageKind::cda};
    cfg.featurizer = FeaturizerKind::embeddings;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("embeddings"), DataError);
  }
  SUBCASE("decoupled and eo may combine") {
    cfg.stages = {StageKind::decoupled, StageKind::eo};
    CHECK_NOTHROW(cfg.validate());
  }
}

TEST_CASE("stage names parse and reject unknowns") {
  CHECK(stage_kind_from("cda") == StageKind::cda);
  CHECK(stage_kind_from("eo") == StageKind::eo);
  CHECK_THROWS_WITH_AS(stage_kind_from("dropout"), doctest::Contains("dropout"), DataError);
}

TEST_CASE("precomputed embeddings replace the featurizer") {
  const Dataset data = generate_synthetic(small_biased(600));
  // embeddings: class id one-hot plus noise-free group column, perfectly separable
  FeatureMatrix emb;
  emb.values.setZero(static_cast<Eigen::Index>(data.size()), 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    emb.values(static_cast<Eigen::Index>(i), data.examples[i].class_label) = 1.0f;
    emb.values(static_cast<Eigen::Index>(i), 3) = static_cast<float>(data.examples[i].group);
  }
  emb.row_ids.resize(data.size());
  PipelineConfig cfg = quick_pipeline();
  cfg.featurizer = FeaturizerKind::embeddings;
  const PipelineResult r = run_pipeline(data, cfg, 5, &emb);
  CHECK(r.test_eval.accuracy == 100.0);

  SUBCASE("row mismatch is rejected") {
    FeatureMatrix bad = emb;
    bad.values.conservativeResize(10, 4);
    bad.row_ids.resize(10);
    CHECK_THROWS_AS(run_pipeline(data, cfg, 5, &bad), DataError);
  }
  SUBCASE("missing matrix is rejected") {
    CHECK_THROWS_AS(run_pipeline(data, cfg, 5, nullptr), DataError);
  }
}

TEST_CASE("experiment config parsing") {
  const std::string text = R"(
[data]
source = "synthetic"

[synthetic]
classes = 3
groups = 2
n = 900
bias = 0.4
cell_rates = "3,1, 1,3, 2,2"
seed = 11

[pipeline]
name = "inlp"
stages = "inlp"
min_df = 1

[train]
epochs = 10

[inlp]
max_iters = 6
guard_epochs = 8
)";
  const ExperimentConfig cfg = experiment_config_from(ConfigFile::parse_string(text));
  CHECK(cfg.source == ExperimentConfig::Source::synthetic);
  CHECK(cfg.synthetic.class_count == 3);
  CHECK(cfg.synthetic.cell_rates.size() == 6);
  CHECK(cfg.debiased.name == "inlp");
  CHECK(cfg.debiased.stages == std::vector<StageKind>{StageKind::inlp});
  CHECK(cfg.debiased.train.epochs == 10);
  CHECK(cfg.debiased.train.learning_rate == 0.1);  // default echoed
  CHECK(cfg.debiased.inlp.max_iters == 6);
  CHECK(cfg.baseline.stages.empty());
  CHECK(cfg.baseline.name == "baseline");

  SUBCASE("unknown stage kind names the stage") {
    const std::string bad = "[pipeline]\nstages = \"inlp,quux\"\n[synthetic]\nn = 100\n";
    CHECK_THROWS_WITH_AS(experiment_config_from(ConfigFile::parse_string(bad)),
                         doctest::Contains("quux"), DataError);
  }
  SUBCASE("unknown keys are rejected") {
    const std::string bad = "[train]\nlearning_rat = 0.1\n";
    CHECK_THROWS_WITH_AS(experiment_config_from(ConfigFile::parse_string(bad)),
                         doctest::Contains("learning_rat"), DataError);
  }
  SUBCASE("bad featurizer is rejected") {
    const std::string bad = "[pipeline]\nfeaturizer = \"resnet\"\n";
    CHECK_THROWS_AS(experiment_config_from(ConfigFile::parse_string(bad)), DataError);
  }
}

TEST_CASE("config file parser details") {
  const ConfigFile cfg = ConfigFile::parse_string(
      "top = 1\n[a]\nx = \"quoted # not comment\"  # trailing\nflag = true\nlist = 1, 2,3\n");
  CHECK(cfg.get_int("", "top", 0) == 1);
  CHECK(cfg.get_string("a", "x", "") == "quoted # not comment");
  CHECK(cfg.get_bool("a", "flag", false));
  CHECK(cfg.get_double_list("a", "list") == std::vector<double>{1, 2, 3});
  CHECK(cfg.get_int("a", "missing", 42) == 42);
  CHECK_THROWS_AS(ConfigFile::parse_string("x = 1\nx = 2\n"), DataError);
  CHECK_THROWS_AS(ConfigFile::parse_string("novalue\n"), DataError);
  CHECK_THROWS_AS(cfg.get_int("a", "x", 0), DataError);
}

TEST_CASE("run_experiment aggregates seeds and averages evaluations") {
  ExperimentConfig cfg;
  cfg.source = ExperimentConfig::Source::synthetic;
  cfg.synthetic = small_biased(900);
  cfg.baseline = quick_pipeline();
  cfg.baseline.name = "baseline";
  cfg.debiased = quick_pipeline();
  cfg.debiased.name = "inlp";
  cfg.debiased.stages = {StageKind::inlp};

  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  const ExperimentResult r = run_experiment(cfg, seeds);
  REQUIRE(r.baseline_evals.size() == 3);
  REQUIRE(r.aggregates.contains("accuracy"));
  const RunAggregate& acc = r.aggregates.at("accuracy");
  double mean = 0;
  for (double v : acc.baseline_values) mean += v;
  CHECK(acc.baseline_mean == doctest::Approx(mean / 3));
  CHECK(r.mean_report.before.class_names == r.mean_report.after.class_names);

  SUBCASE("identical seeds give zero variance") {
    const std::vector<std::uint64_t> same = {4, 4};
    const ExperimentResult rr = run_experiment(cfg, same);
    CHECK(rr.aggregates.at("accuracy").stddev == 0.0);
    CHECK(rr.aggregates.at("accuracy").baseline_stddev == 0.0);
  }
  SUBCASE("threads do not change the outcome") {
    const ExperimentResult rr = run_experiment(cfg, seeds, 3);
    CHECK(rr.aggregates.at("accuracy").values == acc.values);
    CHECK(rr.aggregates.at("accuracy").baseline_values == acc.baseline_values);
  }
}

TEST_CASE("no planted bias: a trained model shows near-zero TPR gaps") {
  SyntheticConfig syn;
  syn.class_count = 2;
  syn.group_count = 2;
  syn.n = 4000;
  syn.bias = 0.0;  // features carry no group information at all
  syn.seed = 5150;
  const Dataset data = generate_synthetic(syn);
  PipelineConfig cfg = quick_pipeline();
  cfg.train.epochs = 3;
  const PipelineResult r = run_pipeline(data, cfg, 77);
  for (double gap : r.test_eval.gap) {
    CHECK(std::abs(gap) < 5.0);  // sampling noise only
  }
}

TEST_CASE("average_eval_results") {
  EvalResult a, b;
  a.class_names = b.class_names = {"c0"};
  a.group_names = b.group_names = {"g0", "g1"};
  a.tpr = {80.0, 60.0};
  b.tpr = {90.0, 70.0};
  a.support = {10, 10};
  b.support = {12, 8};
  a.group_tpr = {75.0, 65.0};
  b.group_tpr = {85.0, 75.0};
  a.accuracy = 70.0;
  b.accuracy = 80.0;
  a.gap = {20.0};
  b.gap = {-10.0};  // unsigned average: (20 + 10) / 2
  a.gap_rms = 20.0;
  b.gap_rms = 10.0;
  const EvalResult avg = average_eval_results({a, b});
  CHECK(avg.tpr[0] == doctest::Approx(85.0));
  CHECK(avg.support[0] == 22);
  CHECK(avg.accuracy == doctest::Approx(75.0));
  CHECK(avg.gap[0] == doctest::Approx(15.0));
  CHECK(avg.gap_rms == doctest::Approx(15.0));
}
