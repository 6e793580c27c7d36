#include "gapfair/debias.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "gapfair/binio.hpp"
#include "gapfair/errors.hpp"
#include "gapfair/rng.hpp"

namespace gapfair {

Dataset cda_augment(const Dataset& train, const SwapLexicon& lexicon, bool flip_group) {
  lexicon.validate();
  if (flip_group && train.group_count() != 2)
    throw DataError("cda_augment: flip_group requires exactly two groups");

  Dataset out;
  out.class_names = train.class_names;
  out.group_names = train.group_names;
  out.examples.reserve(train.examples.size() * 2);
  for (const Example& e : train.examples) out.examples.push_back(e);
  for (const Example& e : train.examples) {
    Example copy;
    copy.tokens = swap_tokens(lexicon, e.tokens);
    copy.class_label = e.class_label;
    copy.group = flip_group ? 1 - e.group : e.group;
    out.examples.push_back(std::move(copy));
  }
  return out;
}

namespace {

double majority_rate(std::span<const int> groups, int group_count) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(group_count), 0);
  for (int g : groups) counts[static_cast<std::size_t>(g)] += 1;
  const std::int64_t top = *std::max_element(counts.begin(), counts.end());
  return static_cast<double>(top) / static_cast<double>(groups.size());
}

double accuracy_of(std::span<const int> predictions, std::span<const int> truth) {
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predictions[i] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

// Orthogonalizes v against the accumulated directions; returns false when the
// residual norm falls below 1e-8 (nothing new to remove).
bool gram_schmidt(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& basis) {
  for (const Eigen::VectorXd& u : basis) {
    v -= u.dot(v) * u;
  }
  const double norm = v.norm();
  if (norm < 1e-8) return false;
  v /= norm;
  return true;
}

}  // namespace

Projection inlp_fit(const FeatureMatrix& features, std::span<const int> groups,
                    const InlpParams& params) {
  const std::size_t n = static_cast<std::size_t>(features.rows());
  if (n != groups.size()) throw DataError("inlp_fit: feature rows != groups length");
  if (n == 0) throw DataError("inlp_fit: empty input");
  int G = 0;
  for (int g : groups) G = std::max(G, g + 1);
  if (G < 2) throw DataError("inlp_fit: need at least two groups");
  const int d = static_cast<int>(features.dims());
  if (params.max_iters < 1) throw DataError("inlp_fit: max_iters must be >= 1");

  Projection proj;
  proj.matrix = Eigen::MatrixXd::Identity(d, d);
  const double threshold = majority_rate(groups, G) + params.stop_margin;

  FeatureMatrix projected = features;
  for (int iter = 0; iter < params.max_iters; ++iter) {
    TrainConfig guard_cfg = params.guard;
    guard_cfg.seed = derive_seed(params.guard.seed, {kStreamGuard, static_cast<std::uint64_t>(iter)});

    std::vector<Eigen::VectorXd> directions;
    std::vector<int> guessed;
    if (G == 2) {
      const LinearModel guard = train(projected, groups, guard_cfg, G);
      guessed = predict(guard, projected);
      directions.push_back(guard.weights.row(0).transpose() - guard.weights.row(1).transpose());
    } else {
      // One-vs-rest guards; group prediction = argmax of the binary scores.
      Eigen::MatrixXd scores(static_cast<Eigen::Index>(n), G);
      for (int g = 0; g < G; ++g) {
        std::vector<int> ovr(n);
        for (std::size_t i = 0; i < n; ++i) ovr[i] = groups[i] == g ? 1 : 0;
        TrainConfig cfg = guard_cfg;
        cfg.seed = derive_seed(guard_cfg.seed, {static_cast<std::uint64_t>(g)});
        const LinearModel guard = train(projected, ovr, cfg, 2);
        directions.push_back(guard.weights.row(1).transpose() - guard.weights.row(0).transpose());
        const Eigen::MatrixXd proba = predict_proba(guard, projected);
        scores.col(g) = proba.col(1);
      }
      guessed.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        for (int g = 1; g < G; ++g) {
          if (scores(static_cast<Eigen::Index>(i), g) > scores(static_cast<Eigen::Index>(i), best))
            best = g;
        }
        guessed[i] = best;
      }
    }

    const double acc = accuracy_of(guessed, groups);
    proj.guard_accuracy_trace.push_back(acc);
    if (acc <= threshold) break;
    if (static_cast<int>(proj.removed_directions.size()) >= d)
      throw DataError("inlp_fit: requested removals exceed the feature dimensionality (" +
                      std::to_string(d) + ")");

    bool removed_any = false;
    for (Eigen::VectorXd& w : directions) {
      if (!gram_schmidt(w, proj.removed_directions)) continue;
      proj.removed_directions.push_back(w);
      proj.matrix -= w * w.transpose();
      removed_any = true;
    }
    if (!removed_any) break;  // degenerate direction, no further progress possible
    proj.iterations_run = iter + 1;

    projected.values =
        (features.values.cast<double>() * proj.matrix).cast<float>();
  }
  return proj;
}

FeatureMatrix inlp_apply(const Projection& projection, const FeatureMatrix& features) {
  if (features.dims() != projection.dims())
    throw DataError("inlp_apply: feature dims (" + std::to_string(features.dims()) +
                    ") != projection dims (" + std::to_string(projection.dims()) + ")");
  FeatureMatrix out;
  out.row_ids = features.row_ids;
  // P symmetric, so row-vector application x^T P equals (P x)^T.
  out.values = (features.values.cast<double>() * projection.matrix).cast<float>();
  return out;
}

void save_projection(const Projection& projection, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  binio::write_magic(out, "GFPJ");
  binio::write_u64(out, static_cast<std::uint64_t>(projection.dims()));
  binio::write_u64(out, static_cast<std::uint64_t>(projection.removed_directions.size()));
  for (Eigen::Index r = 0; r < projection.matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < projection.matrix.cols(); ++c) {
      binio::write_f32(out, static_cast<float>(projection.matrix(r, c)));
    }
  }
  for (const Eigen::VectorXd& dir : projection.removed_directions) {
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
      binio::write_f32(out, static_cast<float>(dir(i)));
    }
  }
}

Projection load_projection(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open projection file");
  binio::expect_magic(in, "GFPJ", path);
  const std::uint64_t d = binio::read_u64(in, path + " dims");
  const std::uint64_t k = binio::read_u64(in, path + " direction count");
  Projection proj;
  proj.matrix.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::uint64_t r = 0; r < d; ++r) {
    for (std::uint64_t c = 0; c < d; ++c) {
      proj.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          binio::read_f32(in, path + " matrix");
    }
  }
  for (std::uint64_t i = 0; i < k; ++i) {
    Eigen::VectorXd dir(static_cast<Eigen::Index>(d));
    for (std::uint64_t j = 0; j < d; ++j) {
      dir(static_cast<Eigen::Index>(j)) = binio::read_f32(in, path + " directions");
    }
    proj.removed_directions.push_back(std::move(dir));
  }
  proj.iterations_run = static_cast<int>(k);
  return proj;
}

DecoupledModel train_decoupled(const FeatureMatrix& features, std::span<const int> labels,
                               std::span<const int> groups, const TrainConfig& config,
                               int class_count, int group_count) {
  const std::size_t n = static_cast<std::size_t>(features.rows());
  if (n != labels.size() || n != groups.size())
    throw DataError("train_decoupled: length mismatch");
  if (group_count < 1) throw DataError("train_decoupled: group_count must be >= 1");

  DecoupledModel model;
  for (int g = 0; g < group_count; ++g) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (groups[i] == g) rows.push_back(i);
    }
    if (rows.empty())
      throw DataError("train_decoupled: group " + std::to_string(g) + " has no examples");
    std::unordered_set<int> distinct;
    for (std::size_t i : rows) distinct.insert(labels[i]);
    if (distinct.size() < 2)
      throw DataError("train_decoupled: group " + std::to_string(g) +
                      " covers a single class; cannot train a classifier");

    FeatureMatrix sub;
    sub.values.resize(static_cast<Eigen::Index>(rows.size()), features.values.cols());
    sub.row_ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sub.values.row(static_cast<Eigen::Index>(i)) =
          features.values.row(static_cast<Eigen::Index>(rows[i]));
      sub.row_ids.push_back(features.row_ids.empty()
                                ? static_cast<std::int64_t>(rows[i])
                                : features.row_ids[rows[i]]);
    }
    std::vector<int> sub_labels;
    sub_labels.reserve(rows.size());
    for (std::size_t i : rows) sub_labels.push_back(labels[i]);

    model.per_group.push_back(train(sub, sub_labels, config, class_count));
  }
  return model;
}

std::vector<int> predict_decoupled(const DecoupledModel& model, const FeatureMatrix& features,
                                   std::span<const int> groups) {
  const std::size_t n = static_cast<std::size_t>(features.rows());
  if (n != groups.size()) throw DataError("predict_decoupled: rows != groups length");
  std::vector<int> out(n);
  for (int g = 0; g < model.group_count(); ++g) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (groups[i] == g) rows.push_back(i);
    }
    if (rows.empty()) continue;
    FeatureMatrix sub;
    sub.values.resize(static_cast<Eigen::Index>(rows.size()), features.values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sub.values.row(static_cast<Eigen::Index>(i)) =
          features.values.row(static_cast<Eigen::Index>(rows[i]));
    }
    const std::vector<int> preds = predict(model.per_group[static_cast<std::size_t>(g)], sub);
    for (std::size_t i = 0; i < rows.size(); ++i) out[rows[i]] = preds[i];
  }
  return out;
}

Eigen::MatrixXd predict_proba_decoupled(const DecoupledModel& model,
                                        const FeatureMatrix& features,
                                        std::span<const int> groups) {
  const std::size_t n = static_cast<std::size_t>(features.rows());
  if (n != groups.size()) throw DataError("predict_proba_decoupled: rows != groups length");
  const int C = model.per_group.at(0).class_count();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), C);
  for (int g = 0; g < model.group_count(); ++g) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (groups[i] == g) rows.push_back(i);
    }
    if (rows.empty()) continue;
    FeatureMatrix sub;
    sub.values.resize(static_cast<Eigen::Index>(rows.size()), features.values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sub.values.row(static_cast<Eigen::Index>(i)) =
          features.values.row(static_cast<Eigen::Index>(rows[i]));
    }
    const Eigen::MatrixXd proba = predict_proba(model.per_group[static_cast<std::size_t>(g)], sub);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.row(static_cast<Eigen::Index>(rows[i])) = proba.row(static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

EoPolicy eo_calibrate(std::span<const int> predictions, std::span<const int> labels,
                      std::span<const int> groups, int class_count, int group_count) {
  const std::size_t n = labels.size();
  if (predictions.size() != n || groups.size() != n)
    throw DataError("eo_calibrate: length mismatch");
  if (n == 0) throw DataError("eo_calibrate: empty calibration split");

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  EoPolicy policy;
  policy.theta.assign(static_cast<std::size_t>(group_count),
                      std::vector<double>(static_cast<std::size_t>(class_count), 0.0));
  policy.calibration_tpr.assign(static_cast<std::size_t>(group_count),
                                std::vector<double>(static_cast<std::size_t>(class_count), kNaN));
  policy.target_tpr.assign(static_cast<std::size_t>(class_count), kNaN);

  std::vector<std::int64_t> cell_n(static_cast<std::size_t>(class_count) * group_count, 0);
  std::vector<std::int64_t> cell_hit(cell_n.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cell =
        static_cast<std::size_t>(labels[i]) * static_cast<std::size_t>(group_count) + groups[i];
    cell_n[cell] += 1;
    if (predictions[i] == labels[i]) cell_hit[cell] += 1;
  }

  for (int p = 0; p < class_count; ++p) {
    double target = std::numeric_limits<double>::infinity();
    for (int z = 0; z < group_count; ++z) {
      const std::size_t cell =
          static_cast<std::size_t>(p) * static_cast<std::size_t>(group_count) + z;
      if (cell_n[cell] == 0) {
        policy.warnings.push_back("class " + std::to_string(p) + ", group " + std::to_string(z) +
                                  ": empty calibration cell, demotion disabled");
        continue;
      }
      const double tpr =
          100.0 * static_cast<double>(cell_hit[cell]) / static_cast<double>(cell_n[cell]);
      policy.calibration_tpr[static_cast<std::size_t>(z)][static_cast<std::size_t>(p)] = tpr;
      target = std::min(target, tpr);
    }
    if (std::isinf(target)) continue;  // every cell empty
    policy.target_tpr[static_cast<std::size_t>(p)] = target;
    if (target <= 0.0) continue;  // zero TPR in some group: no-op for this class
    for (int z = 0; z < group_count; ++z) {
      const double tpr = policy.calibration_tpr[static_cast<std::size_t>(z)][static_cast<std::size_t>(p)];
      if (std::isnan(tpr) || tpr <= target) continue;
      policy.theta[static_cast<std::size_t>(z)][static_cast<std::size_t>(p)] = 1.0 - target / tpr;
    }
  }
  return policy;
}

std::vector<int> eo_apply(const EoPolicy& policy, std::span<const int> predictions,
                          std::span<const int> groups, const Eigen::MatrixXd& proba,
                          std::uint64_t seed) {
  const std::size_t n = predictions.size();
  if (groups.size() != n) throw DataError("eo_apply: length mismatch");
  if (static_cast<std::size_t>(proba.rows()) != n)
    throw DataError("eo_apply: probability matrix rows != predictions");
  const int C = policy.class_count();
  if (proba.cols() != C) throw DataError("eo_apply: probability matrix columns != class count");
  if (policy.fallback == EoFallback::abstain_class &&
      (policy.abstain_class < 0 || policy.abstain_class >= C))
    throw DataError("eo_apply: abstain_class out of range");

  Rng rng(derive_seed(seed, {kStreamEo}));
  std::vector<int> out(predictions.begin(), predictions.end());
  for (std::size_t i = 0; i < n; ++i) {
    const int p = predictions[i];
    const int z = groups[i];
    if (p < 0 || p >= C) throw DataError("eo_apply: prediction out of range");
    if (z < 0 || z >= policy.group_count())
      throw DataError("eo_apply: group id without a policy entry");
    const double theta = policy.theta[static_cast<std::size_t>(z)][static_cast<std::size_t>(p)];
    if (theta <= 0.0) continue;
    if (rng.next_double() >= theta) continue;
    if (policy.fallback == EoFallback::abstain_class) {
      out[i] = policy.abstain_class;
      continue;
    }
    // Second-highest-probability class; ties toward the lower id.
    int second = -1;
    for (int c = 0; c < C; ++c) {
      if (c == p) continue;
      if (second < 0 || proba(static_cast<Eigen::Index>(i), c) >
                            proba(static_cast<Eigen::Index>(i), second)) {
        second = c;
      }
    }
    out[i] = second >= 0 ? second : p;
  }
  return out;
}

}  // namespace gapfair
