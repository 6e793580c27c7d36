#include "gapfair/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <json.hpp>

#include "gapfair/errors.hpp"
#include "gapfair/rng.hpp"
#include "gapfair/version.hpp"

namespace gapfair {

std::string to_string(StageKind kind) {
  switch (kind) {
    case StageKind::cda: return "cda";
    case StageKind::inlp: return "inlp";
    case StageKind::decoupled: return "decoupled";
    case StageKind::eo: return "eo";
  }
  return "?";
}

StageKind stage_kind_from(const std::string& name) {
  if (name == "cda") return StageKind::cda;
  if (name == "inlp") return StageKind::inlp;
  if (name == "decoupled") return StageKind::decoupled;
  if (name == "eo") return StageKind::eo;
  throw DataError("unknown stage kind \"" + name + "\" (expected cda, inlp, decoupled or eo)");
}

bool PipelineConfig::has_stage(StageKind kind) const {
  return std::find(stages.begin(), stages.end(), kind) != stages.end();
}

void PipelineConfig::validate() const {
  split.validate();
  train.validate();
  int last_rank = -1;
  for (StageKind s : stages) {
    const int rank = static_cast<int>(s);
    if (rank == last_rank)
      throw DataError("pipeline \"" + name + "\": stage " + to_string(s) + " listed twice");
    if (rank < last_rank)
      throw DataError("pipeline \"" + name + "\": stage " + to_string(s) +
                      " out of canonical order (cda -> inlp -> decoupled -> eo)");
    last_rank = rank;
  }
  if (has_stage(StageKind::cda) && featurizer == FeaturizerKind::embeddings)
    throw DataError("pipeline \"" + name +
                    "\": cda cannot run on precomputed embeddings (data stage after featurization)");
  if (min_df < 1) throw DataError("pipeline \"" + name + "\": min_df must be >= 1");
}

namespace {

FeatureMatrix select_rows(const FeatureMatrix& all, const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.values.resize(static_cast<Eigen::Index>(idx.size()), all.values.cols());
  out.row_ids.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) =
        all.values.row(static_cast<Eigen::Index>(idx[i]));
    out.row_ids.push_back(static_cast<std::int64_t>(idx[i]));
  }
  return out;
}

}  // namespace

PipelineResult run_pipeline(const Dataset& raw, const PipelineConfig& config, std::uint64_t seed,
                            const FeatureMatrix* embeddings) {
  config.validate();
  raw.validate();
  if (config.featurizer == FeaturizerKind::embeddings && embeddings == nullptr)
    throw DataError("pipeline \"" + config.name +
                    "\": featurizer is embeddings but no embedding matrix was supplied");
  if (embeddings != nullptr) {
    if (static_cast<std::size_t>(embeddings->rows()) != raw.size())
      throw DataError("embedding rows (" + std::to_string(embeddings->rows()) +
                      ") != dataset size (" + std::to_string(raw.size()) + ")");
    embeddings->validate_finite();
  }

  nlohmann::json manifest;
  manifest["tool_version"] = kVersion;
  manifest["pipeline"] = config.name;
  manifest["seed"] = seed;
  manifest["seed_scheme"] =
      "splitmix64 path derivation: derive_seed(seed, {stream, counter...}); "
      "streams: synthetic=1 split=2 train=3 guard=4 eo=5 init=6";
  manifest["stages"] = nlohmann::json::array();
  for (StageKind s : config.stages) manifest["stages"].push_back(to_string(s));
  manifest["split"] = {{"train", config.split.train},
                       {"dev", config.split.dev},
                       {"test", config.split.test},
                       {"stratified", config.split.stratified},
                       {"seed", derive_seed(seed, {kStreamSplit})}};
  manifest["train"] = {{"learning_rate", config.train.learning_rate},
                       {"l2_penalty", config.train.l2_penalty},
                       {"epochs", config.train.epochs},
                       {"batch_size", config.train.batch_size},
                       {"tolerance", config.train.tolerance},
                       {"seed", derive_seed(seed, {kStreamTrain})}};
  manifest["filter_stopwords"] = config.filter_stopwords;
  manifest["stopword_file"] = config.stopword_file.empty() ? "<builtin>" : config.stopword_file;

  // Split on the raw data so CDA sees unfiltered tokens.
  SplitSpec split_spec = config.split;
  split_spec.seed = derive_seed(seed, {kStreamSplit});
  Splits splits = split(raw, split_spec);

  Dataset train_set = std::move(splits.train);
  if (config.has_stage(StageKind::cda)) {
    const SwapLexicon& lex = config.cda.lexicon;
    if (lex.pairs.empty())
      throw DataError("pipeline \"" + config.name + "\" [stage cda]: empty swap lexicon");
    train_set = cda_augment(train_set, lex, config.cda.flip_group);
    manifest["cda"] = {{"pairs", lex.pairs.size()}, {"flip_group", config.cda.flip_group}};
  }

  if (config.filter_stopwords) {
    const auto stopwords = config.stopword_file.empty() ? default_stopwords()
                                                        : load_stopwords(config.stopword_file);
    train_set = remove_stopwords(train_set, stopwords);
    splits.dev = remove_stopwords(splits.dev, stopwords);
    splits.test = remove_stopwords(splits.test, stopwords);
  }

  // Featurize.
  FeatureMatrix train_x, dev_x, test_x;
  if (config.featurizer == FeaturizerKind::embeddings) {
    train_x = select_rows(*embeddings, splits.train_idx);
    dev_x = select_rows(*embeddings, splits.dev_idx);
    test_x = select_rows(*embeddings, splits.test_idx);
    manifest["features"] = {{"kind", "embeddings"}, {"dims", embeddings->dims()}};
  } else {
    Vocabulary vocab = fit_bow(train_set, config.min_df, config.max_features,
                               config.featurizer == FeaturizerKind::tfidf);
    train_x = transform(vocab, train_set);
    dev_x = transform(vocab, splits.dev);
    test_x = transform(vocab, splits.test);
    manifest["features"] = {
        {"kind", config.featurizer == FeaturizerKind::tfidf ? "tfidf" : "counts"},
        {"min_df", config.min_df},
        {"max_features", config.max_features},
        {"vocabulary", vocab.dims()}};
  }

  PipelineResult result;
  const std::vector<int> train_labels = train_set.labels();
  const std::vector<int> train_groups = train_set.groups();

  if (config.has_stage(StageKind::inlp)) {
    InlpParams params = config.inlp;
    params.guard.seed = seed;
    result.projection = inlp_fit(train_x, train_groups, params);
    train_x = inlp_apply(*result.projection, train_x);
    dev_x = inlp_apply(*result.projection, dev_x);
    test_x = inlp_apply(*result.projection, test_x);
    manifest["inlp"] = {{"max_iters", params.max_iters},
                        {"stop_margin", params.stop_margin},
                        {"guard_epochs", params.guard.epochs},
                        {"iterations_run", result.projection->iterations_run},
                        {"removed_directions", result.projection->removed_directions.size()},
                        {"guard_accuracy_trace", result.projection->guard_accuracy_trace}};
  }

  TrainConfig train_cfg = config.train;
  train_cfg.seed = derive_seed(seed, {kStreamTrain});
  const int C = raw.class_count();
  const int G = raw.group_count();

  std::vector<int> dev_pred, test_pred;
  Eigen::MatrixXd dev_proba, test_proba;
  if (config.has_stage(StageKind::decoupled)) {
    result.decoupled = train_decoupled(train_x, train_labels, train_groups, train_cfg, C, G);
    const std::vector<int> dev_groups = splits.dev.groups();
    const std::vector<int> test_groups = splits.test.groups();
    dev_pred = predict_decoupled(*result.decoupled, dev_x, dev_groups);
    test_pred = predict_decoupled(*result.decoupled, test_x, test_groups);
    if (config.has_stage(StageKind::eo)) {
      dev_proba = predict_proba_decoupled(*result.decoupled, dev_x, dev_groups);
      test_proba = predict_proba_decoupled(*result.decoupled, test_x, test_groups);
    }
    manifest["decoupled"] = {{"groups", G}};
  } else {
    result.model = train(train_x, train_labels, train_cfg, C);
    dev_pred = predict(*result.model, dev_x);
    test_pred = predict(*result.model, test_x);
    if (config.has_stage(StageKind::eo)) {
      dev_proba = predict_proba(*result.model, dev_x);
      test_proba = predict_proba(*result.model, test_x);
    }
  }

  if (config.has_stage(StageKind::eo)) {
    // Calibrated on the dev split, applied to test.
    const std::vector<int> dev_labels = splits.dev.labels();
    const std::vector<int> dev_groups = splits.dev.groups();
    EoPolicy policy = eo_calibrate(dev_pred, dev_labels, dev_groups, C, G);
    policy.fallback = config.eo.fallback;
    if (policy.fallback == EoFallback::abstain_class) {
      const auto it = std::find(raw.class_names.begin(), raw.class_names.end(),
                                config.eo.abstain_class_name);
      if (it == raw.class_names.end())
        throw DataError("pipeline \"" + config.name + "\" [stage eo]: abstain class \"" +
                        config.eo.abstain_class_name + "\" not in the class catalog");
      policy.abstain_class = static_cast<int>(it - raw.class_names.begin());
    }
    test_pred = eo_apply(policy, test_pred, splits.test.groups(), test_proba,
                         derive_seed(seed, {kStreamEo}));
    manifest["eo"] = {{"calibration_split", "dev"},
                      {"fallback", policy.fallback == EoFallback::second_best ? "second_best"
                                                                              : "abstain_class"},
                      {"warnings", policy.warnings}};
    result.eo_policy = std::move(policy);
  }

  result.test_labels = splits.test.labels();
  result.test_groups = splits.test.groups();
  result.test_predictions = std::move(test_pred);
  result.test_eval = evaluate(result.test_predictions, result.test_labels, result.test_groups,
                              raw.class_names, raw.group_names);
  result.test_class_populations.assign(static_cast<std::size_t>(C), 0);
  for (int y : result.test_labels) result.test_class_populations[static_cast<std::size_t>(y)] += 1;

  manifest["sizes"] = {{"train", train_set.size()},
                       {"dev", splits.dev.size()},
                       {"test", splits.test.size()}};
  result.manifest_json = manifest.dump(2);
  return result;
}

MetricMap metrics_from(const EvalResult& eval) {
  MetricMap m;
  m["accuracy"] = eval.accuracy;
  if (!std::isnan(eval.gap_rms)) m["gap_rms"] = eval.gap_rms;
  for (int g = 0; g < eval.group_count(); ++g) {
    if (!std::isnan(eval.group_tpr[static_cast<std::size_t>(g)]))
      m["tpr:" + eval.group_names[static_cast<std::size_t>(g)]] =
          eval.group_tpr[static_cast<std::size_t>(g)];
  }
  for (int c = 0; c < eval.class_count(); ++c) {
    for (int g = 0; g < eval.group_count(); ++g) {
      const double tpr = eval.tpr_at(c, g);
      if (!std::isnan(tpr))
        m["tpr:" + eval.class_names[static_cast<std::size_t>(c)] + ":" +
          eval.group_names[static_cast<std::size_t>(g)]] = tpr;
    }
    const double gap = eval.gap[static_cast<std::size_t>(c)];
    if (!std::isnan(gap)) m["gap:" + eval.class_names[static_cast<std::size_t>(c)]] = gap;
  }
  return m;
}

EvalResult average_eval_results(const std::vector<EvalResult>& runs) {
  if (runs.empty()) throw DataError("average_eval_results: no runs");
  const EvalResult& first = runs[0];
  for (const EvalResult& r : runs) {
    if (r.class_names != first.class_names || r.group_names != first.group_names)
      throw DataError("average_eval_results: catalogs differ between runs");
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  EvalResult out;
  out.class_names = first.class_names;
  out.group_names = first.group_names;
  const std::size_t cells = first.tpr.size();
  out.tpr.assign(cells, kNaN);
  out.support.assign(cells, 0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double sum = 0.0;
    int defined = 0;
    for (const EvalResult& r : runs) {
      out.support[cell] += r.support[cell];
      if (!std::isnan(r.tpr[cell])) {
        sum += r.tpr[cell];
        ++defined;
      }
    }
    if (defined > 0) out.tpr[cell] = sum / defined;
  }
  out.group_tpr.assign(first.group_tpr.size(), 0.0);
  for (std::size_t g = 0; g < out.group_tpr.size(); ++g) {
    double sum = 0.0;
    for (const EvalResult& r : runs) sum += r.group_tpr[g];
    out.group_tpr[g] = sum / static_cast<double>(runs.size());
  }
  double acc = 0.0;
  for (const EvalResult& r : runs) acc += r.accuracy;
  out.accuracy = acc / static_cast<double>(runs.size());

  // Per-run unsigned gaps averaged (the mean of |gap| is what per-class tables
  // report); gap_rms is the mean of per-run values, not recomputed.
  out.gap.assign(first.gap.size(), kNaN);
  for (std::size_t c = 0; c < out.gap.size(); ++c) {
    double sum = 0.0;
    int defined = 0;
    for (const EvalResult& r : runs) {
      if (!std::isnan(r.gap[c])) {
        sum += std::abs(r.gap[c]);
        ++defined;
      }
    }
    if (defined > 0) {
      out.gap[c] = sum / defined;
    } else {
      ++out.undefined_gap_count;
    }
  }
  double rms = 0.0;
  int rms_defined = 0;
  for (const EvalResult& r : runs) {
    if (!std::isnan(r.gap_rms)) {
      rms += r.gap_rms;
      ++rms_defined;
    }
  }
  out.gap_rms = rms_defined > 0 ? rms / rms_defined : kNaN;
  return out;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from(ConfigFile::parse_file(path));
}

ExperimentConfig experiment_config_from(const ConfigFile& file) {
  ExperimentConfig cfg;

  file.restrict_keys("data", {"source", "path", "format", "embeddings"});
  const std::string source = file.get_string("data", "source", "synthetic");
  if (source == "file") {
    cfg.source = ExperimentConfig::Source::file;
    cfg.data_path = file.require_string("data", "path");
    const std::string fmt = file.get_string("data", "format", "jsonl");
    if (fmt == "jsonl") {
      cfg.data_format = DatasetFormat::jsonl;
    } else if (fmt == "csv") {
      cfg.data_format = DatasetFormat::csv;
    } else {
      throw DataError("config [data] format must be jsonl or csv, got \"" + fmt + "\"");
    }
    cfg.embeddings_path = file.get_string("data", "embeddings", "");
  } else if (source == "synthetic") {
    cfg.source = ExperimentConfig::Source::synthetic;
    file.restrict_keys("synthetic",
                       {"classes", "groups", "n", "bias", "cell_rates", "cell_counts",
                        "class_vocab", "marker_vocab", "min_tokens", "max_tokens", "seed"});
    cfg.synthetic.class_count = static_cast<int>(file.get_int("synthetic", "classes", 2));
    cfg.synthetic.group_count = static_cast<int>(file.get_int("synthetic", "groups", 2));
    cfg.synthetic.n = file.get_int("synthetic", "n", 1000);
    cfg.synthetic.bias = file.get_double("synthetic", "bias", 0.0);
    cfg.synthetic.cell_rates = file.get_double_list("synthetic", "cell_rates");
    for (double v : file.get_double_list("synthetic", "cell_counts")) {
      cfg.synthetic.cell_counts.push_back(static_cast<std::int64_t>(v));
    }
    cfg.synthetic.class_vocab = static_cast<int>(file.get_int("synthetic", "class_vocab", 40));
    cfg.synthetic.marker_vocab = static_cast<int>(file.get_int("synthetic", "marker_vocab", 8));
    cfg.synthetic.min_tokens = static_cast<int>(file.get_int("synthetic", "min_tokens", 6));
    cfg.synthetic.max_tokens = static_cast<int>(file.get_int("synthetic", "max_tokens", 14));
    cfg.synthetic.seed = static_cast<std::uint64_t>(file.get_int("synthetic", "seed", 0));
  } else {
    throw DataError("config [data] source must be file or synthetic, got \"" + source + "\"");
  }

  PipelineConfig base;
  file.restrict_keys("pipeline",
                     {"name", "stages", "featurizer", "min_df", "max_features",
                      "filter_stopwords", "stopword_file"});
  base.name = file.get_string("pipeline", "name", "debiased");
  const std::string feat = file.get_string("pipeline", "featurizer", "tfidf");
  if (feat == "tfidf") {
    base.featurizer = FeaturizerKind::tfidf;
  } else if (feat == "counts" || feat == "bow") {
    base.featurizer = FeaturizerKind::counts;
  } else if (feat == "embeddings") {
    base.featurizer = FeaturizerKind::embeddings;
    if (cfg.embeddings_path.empty())
      throw DataError("config: featurizer = embeddings requires [data] embeddings = <path>");
  } else {
    throw DataError("config [pipeline] featurizer must be tfidf, bow or embeddings");
  }
  base.min_df = file.get_int("pipeline", "min_df", 2);
  base.max_features = file.get_int("pipeline", "max_features", 50000);
  base.filter_stopwords = file.get_bool("pipeline", "filter_stopwords", true);
  base.stopword_file = file.get_string("pipeline", "stopword_file", "");

  file.restrict_keys("split", {"train", "dev", "test", "stratified"});
  base.split.train = file.get_double("split", "train", 0.8);
  base.split.dev = file.get_double("split", "dev", 0.1);
  base.split.test = file.get_double("split", "test", 0.1);
  base.split.stratified = file.get_bool("split", "stratified", true);

  file.restrict_keys("train",
                     {"learning_rate", "l2_penalty", "epochs", "batch_size", "tolerance"});
  base.train.learning_rate = file.get_double("train", "learning_rate", 0.1);
  base.train.l2_penalty = file.get_double("train", "l2_penalty", 1e-4);
  base.train.epochs = static_cast<int>(file.get_int("train", "epochs", 50));
  base.train.batch_size = static_cast<int>(file.get_int("train", "batch_size", 256));
  base.train.tolerance = file.get_double("train", "tolerance", 0.0);

  file.restrict_keys("cda", {"lexicon_file", "flip_group", "use_marker_lexicon"});
  base.cda.flip_group = file.get_bool("cda", "flip_group", true);
  base.cda.use_marker_lexicon = file.get_bool("cda", "use_marker_lexicon", false);
  const std::string lexicon_file = file.get_string("cda", "lexicon_file", "");
  if (!lexicon_file.empty()) base.cda.lexicon = load_lexicon(lexicon_file);

  file.restrict_keys("inlp", {"max_iters", "stop_margin", "guard_epochs", "guard_learning_rate",
                              "guard_l2", "guard_batch_size"});
  base.inlp.max_iters = static_cast<int>(file.get_int("inlp", "max_iters", 30));
  base.inlp.stop_margin = file.get_double("inlp", "stop_margin", 0.02);
  base.inlp.guard.epochs = static_cast<int>(file.get_int("inlp", "guard_epochs", 25));
  base.inlp.guard.learning_rate = file.get_double("inlp", "guard_learning_rate", 0.1);
  base.inlp.guard.l2_penalty = file.get_double("inlp", "guard_l2", 1e-4);
  base.inlp.guard.batch_size = static_cast<int>(file.get_int("inlp", "guard_batch_size", 256));

  file.restrict_keys("eo", {"fallback", "abstain_class"});
  const std::string fallback = file.get_string("eo", "fallback", "second_best");
  if (fallback == "second_best") {
    base.eo.fallback = EoFallback::second_best;
  } else if (fallback == "abstain_class") {
    base.eo.fallback = EoFallback::abstain_class;
    base.eo.abstain_class_name = file.require_string("eo", "abstain_class");
  } else {
    throw DataError("config [eo] fallback must be second_best or abstain_class");
  }

  cfg.debiased = base;
  for (const std::string& name : file.get_list("pipeline", "stages")) {
    cfg.debiased.stages.push_back(stage_kind_from(name));
  }
  if (cfg.source == ExperimentConfig::Source::synthetic &&
      cfg.debiased.has_stage(StageKind::cda) && cfg.debiased.cda.lexicon.pairs.empty() &&
      cfg.debiased.cda.use_marker_lexicon) {
    cfg.debiased.cda.lexicon = marker_lexicon(cfg.synthetic);
  }

  cfg.baseline = base;
  cfg.baseline.name = "baseline";
  cfg.baseline.stages.clear();

  cfg.debiased.validate();
  cfg.baseline.validate();
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                std::span<const std::uint64_t> seeds, int threads) {
  if (seeds.size() < 2) throw DataError("run_experiment: need at least 2 seeds");

  Dataset data;
  std::optional<FeatureMatrix> embeddings;
  if (config.source == ExperimentConfig::Source::synthetic) {
    data = generate_synthetic(config.synthetic);
  } else {
    data = load_dataset(config.data_path, config.data_format);
    if (!config.embeddings_path.empty()) {
      embeddings = load_embeddings(config.embeddings_path);
      if (static_cast<std::size_t>(embeddings->rows()) != data.size())
        throw DataError("embedding rows != dataset size");
    }
  }
  const FeatureMatrix* emb = embeddings ? &*embeddings : nullptr;

  struct SeedOutcome {
    EvalResult baseline;
    EvalResult debiased;
    std::vector<std::int64_t> populations;
    std::string manifest;
  };
  std::vector<SeedOutcome> outcomes(seeds.size());

  const int max_threads = std::max(1, threads);
  std::vector<std::size_t> pending(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) pending[i] = i;
  for (std::size_t at = 0; at < pending.size(); at += static_cast<std::size_t>(max_threads)) {
    std::vector<std::thread> batch;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(max_threads));
    for (int t = 0; t < max_threads && at + static_cast<std::size_t>(t) < pending.size(); ++t) {
      const std::size_t run = pending[at + static_cast<std::size_t>(t)];
      batch.emplace_back([&, run, t] {
        try {
          PipelineResult base = run_pipeline(data, config.baseline, seeds[run], emb);
          PipelineResult deb = run_pipeline(data, config.debiased, seeds[run], emb);
          outcomes[run] = SeedOutcome{std::move(base.test_eval), std::move(deb.test_eval),
                                      std::move(deb.test_class_populations),
                                      std::move(deb.manifest_json)};
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (std::thread& th : batch) th.join();
    for (std::size_t run = at; run < at + batch.size(); ++run) {
      if (errors[run - at]) {
        const std::string where =
            "run " + std::to_string(run) + " (seed " + std::to_string(seeds[run]) + ") failed: ";
        try {
          std::rethrow_exception(errors[run - at]);
        } catch (const NumericalError& e) {
          throw NumericalError(where + e.what());
        } catch (const std::exception& e) {
          throw DataError(where + e.what());
        }
      }
    }
  }

  ExperimentResult result;
  result.seeds.assign(seeds.begin(), seeds.end());
  for (SeedOutcome& o : outcomes) {
    result.baseline_evals.push_back(std::move(o.baseline));
    result.debiased_evals.push_back(std::move(o.debiased));
  }

  // Per-metric aggregates with Welch tests (values already computed above, so
  // the runner callbacks just replay them).
  std::size_t cursor_base = 0, cursor_deb = 0;
  const RunFn base_fn = [&](std::uint64_t) {
    return metrics_from(result.baseline_evals[cursor_base++]);
  };
  const RunFn deb_fn = [&](std::uint64_t) {
    return metrics_from(result.debiased_evals[cursor_deb++]);
  };
  result.aggregates = run_repeated(base_fn, deb_fn, seeds);

  // Comparison of the averaged evaluations; populations summed across seeds.
  const EvalResult mean_base = average_eval_results(result.baseline_evals);
  const EvalResult mean_deb = average_eval_results(result.debiased_evals);
  std::vector<std::int64_t> populations(static_cast<std::size_t>(mean_base.class_count()), 0);
  for (const SeedOutcome& o : outcomes) {
    for (std::size_t c = 0; c < populations.size(); ++c) populations[c] += o.populations[c];
  }
  result.mean_report = compare(mean_base, mean_deb, populations);

  nlohmann::json manifest;
  manifest["tool_version"] = kVersion;
  manifest["seeds"] = result.seeds;
  manifest["last_run_manifest"] =
      nlohmann::json::parse(outcomes.back().manifest);
  result.manifest_json = manifest.dump(2);
  return result;
}

}  // namespace gapfair
