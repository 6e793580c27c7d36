#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gapfair/classifier.hpp"
#include "gapfair/corpus.hpp"
#include "gapfair/features.hpp"

namespace gapfair {

// --- Counterfactual data augmentation -------------------------------------

// Appends one lexicon-swapped copy of every training example. The copy keeps
// its class label; with flip_group (binary groups only) its group attribute
// is toggled. Output order: all originals, then all copies.
Dataset cda_augment(const Dataset& train, const SwapLexicon& lexicon, bool flip_group);

// --- Iterative nullspace projection ----------------------------------------

// Symmetric idempotent projector P = I - sum(u u^T) over removed directions.
struct Projection {
  Eigen::MatrixXd matrix;                        // d x d
  std::vector<Eigen::VectorXd> removed_directions;  // orthonormal unit vectors
  int iterations_run = 0;
  std::vector<double> guard_accuracy_trace;  // accuracy before each removal,
                                             // plus the final below-threshold one

  int dims() const { return static_cast<int>(matrix.rows()); }
  int rank() const { return dims() - static_cast<int>(removed_directions.size()); }
};

struct InlpParams {
  int max_iters = 30;
  double stop_margin = 0.02;  // stop once guard accuracy <= majority + margin
  TrainConfig guard;          // guard classifier hyperparameters

  InlpParams() {
    guard.epochs = 25;
    guard.learning_rate = 0.1;
    guard.l2_penalty = 1e-4;
  }
};

// Repeatedly trains a linear guard to predict the group from projected
// features, removes the guard's weight direction (Gram-Schmidt against the
// already-removed ones), and deflates the projector, until the guard cannot
// beat the majority rate by more than stop_margin.
Projection inlp_fit(const FeatureMatrix& features, std::span<const int> groups,
                    const InlpParams& params);

// Rows x -> P x.
FeatureMatrix inlp_apply(const Projection& projection, const FeatureMatrix& features);

// GFPJ file: magic "GFPJ", u64 d, u64 k, P (d*d f32), directions (k*d f32), LE.
void save_projection(const Projection& projection, const std::string& path);
Projection load_projection(const std::string& path);

// --- Decoupled per-group classifiers ---------------------------------------

struct DecoupledModel {
  std::vector<LinearModel> per_group;  // index = group id

  int group_count() const { return static_cast<int>(per_group.size()); }
};

// One model per group, each trained only on that group's rows with the shared
// config. Every group must cover at least two classes.
DecoupledModel train_decoupled(const FeatureMatrix& features, std::span<const int> labels,
                               std::span<const int> groups, const TrainConfig& config,
                               int class_count, int group_count);

// Routes each row to the model of its own group.
std::vector<int> predict_decoupled(const DecoupledModel& model, const FeatureMatrix& features,
                                   std::span<const int> groups);
Eigen::MatrixXd predict_proba_decoupled(const DecoupledModel& model,
                                        const FeatureMatrix& features,
                                        std::span<const int> groups);

// --- Equalized-opportunity post-processing ---------------------------------

enum class EoFallback { second_best, abstain_class };

// Randomized demotion policy: theta[group][class] is the probability that a
// prediction of `class` made for `group` is demoted to the fallback label.
struct EoPolicy {
  std::vector<std::vector<double>> theta;       // [group][class]
  std::vector<std::vector<double>> calibration_tpr;  // [group][class], percent, NaN if empty cell
  std::vector<double> target_tpr;               // per class: min over groups, percent
  EoFallback fallback = EoFallback::second_best;
  int abstain_class = -1;  // used when fallback == abstain_class
  std::vector<std::string> warnings;  // empty calibration cells etc.

  int class_count() const { return static_cast<int>(target_tpr.size()); }
  int group_count() const { return static_cast<int>(theta.size()); }
};

// For each class p: target = min over groups of calibration TPR; a group above
// the target demotes with theta = 1 - target/TPR. Classes with zero TPR in any
// group become no-ops. Empty cells get theta 0 plus a warning, never a crash.
EoPolicy eo_calibrate(std::span<const int> predictions, std::span<const int> labels,
                      std::span<const int> groups, int class_count, int group_count);

// Applies the policy with a seeded RNG; demoted predictions move to the
// second-highest-probability class (or the configured abstain class).
std::vector<int> eo_apply(const EoPolicy& policy, std::span<const int> predictions,
                          std::span<const int> groups, const Eigen::MatrixXd& proba,
                          std::uint64_t seed);

}  // namespace gapfair
