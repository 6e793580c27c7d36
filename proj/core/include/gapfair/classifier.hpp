#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gapfair/features.hpp"

namespace gapfair {

struct TrainConfig {
  double learning_rate = 0.1;
  double l2_penalty = 1e-4;
  int epochs = 50;
  int batch_size = 256;
  std::uint64_t seed = 0;
  double tolerance = 0.0;  // stop early when |loss delta| per epoch falls below

  void validate() const;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs_run = 0;
  double l2_penalty = 0.0;
  double learning_rate = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Multinomial logistic regression: C x d weights plus a C bias vector.
struct LinearModel {
  Eigen::MatrixXd weights;  // C x d
  Eigen::VectorXd bias;     // C
  TrainingMeta meta;

  int class_count() const { return static_cast<int>(weights.rows()); }
  int dims() const { return static_cast<int>(weights.cols()); }
};

// Mean softmax cross-entropy over the rows plus (l2/2)*||W||^2.
double softmax_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                    const FeatureMatrix& features, std::span<const int> labels, double l2);

// Analytic gradient of softmax_loss with respect to weights and bias.
void softmax_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                      const FeatureMatrix& features, std::span<const int> labels, double l2,
                      Eigen::MatrixXd& grad_weights, Eigen::VectorXd& grad_bias);

// Seeded mini-batch gradient descent; bit-reproducible for a given config.
// The l2 term is applied as a proximal shrinkage step, which keeps the update
// stable for arbitrarily large penalties. class_count <= 0 infers C from the
// labels. Throws NumericalError on divergence, DataError on single-class input.
LinearModel train(const FeatureMatrix& features, std::span<const int> labels,
                  const TrainConfig& config, int class_count = 0);

// Argmax of the softmax scores; ties break toward the lowest class id.
std::vector<int> predict(const LinearModel& model, const FeatureMatrix& features);

// n x C probability matrix; every row sums to 1.
Eigen::MatrixXd predict_proba(const LinearModel& model, const FeatureMatrix& features);

// GFLM file: magic "GFLM", u64 C, u64 d, bias (C f32), weights (C*d f32), LE.
void save_model(const LinearModel& model, const std::string& path);
LinearModel load_model(const std::string& path);

}  // namespace gapfair
