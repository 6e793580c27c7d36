#include "gapfair/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "gapfair/binio.hpp"
#include "gapfair/errors.hpp"
#include "gapfair/rng.hpp"

namespace gapfair {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw DataError("train config: learning_rate must be positive");
  if (epochs < 1) throw DataError("train config: epochs must be >= 1");
  if (l2_penalty < 0.0) throw DataError("train config: l2_penalty must be >= 0");
  if (batch_size < 1) throw DataError("train config: batch_size must be >= 1");
}

namespace {

// Row-wise softmax of logits, stabilized by the row max.
Eigen::MatrixXd softmax_rows(Eigen::MatrixXd logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - m).exp();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

Eigen::MatrixXd logits_for(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                           const FeatureMatrix& features,
                           std::span<const std::size_t> rows) {
  const Eigen::Index d = weights.cols();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x.row(i) = features.values.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]))
                   .cast<double>();
  }
  Eigen::MatrixXd logits = x * weights.transpose();
  logits.rowwise() += bias.transpose();
  return logits;
}

std::vector<std::size_t> all_rows(const FeatureMatrix& features) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(features.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

double softmax_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                    const FeatureMatrix& features, std::span<const int> labels, double l2) {
  const auto rows = all_rows(features);
  Eigen::MatrixXd logits = logits_for(weights, bias, features, rows);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    loss += lse - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  loss /= static_cast<double>(logits.rows());
  loss += 0.5 * l2 * weights.squaredNorm();
  return loss;
}

void softmax_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                      const FeatureMatrix& features, std::span<const int> labels, double l2,
                      Eigen::MatrixXd& grad_weights, Eigen::VectorXd& grad_bias) {
  const auto rows = all_rows(features);
  Eigen::MatrixXd probs = softmax_rows(logits_for(weights, bias, features, rows));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    probs(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  probs /= static_cast<double>(probs.rows());
  grad_weights = probs.transpose() * features.values.cast<double>();
  grad_weights += l2 * weights;
  grad_bias = probs.colwise().sum().transpose();
}

LinearModel train(const FeatureMatrix& features, std::span<const int> labels,
                  const TrainConfig& config, int class_count) {
  config.validate();
  const std::size_t n = static_cast<std::size_t>(features.rows());
  if (n != labels.size())
    throw DataError("train: feature rows (" + std::to_string(n) + ") != labels (" +
                    std::to_string(labels.size()) + ")");
  if (n == 0) throw DataError("train: empty training set");

  int max_label = 0;
  std::unordered_set<int> distinct;
  for (int y : labels) {
    if (y < 0) throw DataError("train: negative class id");
    max_label = std::max(max_label, y);
    distinct.insert(y);
  }
  const int C = class_count > 0 ? class_count : max_label + 1;
  if (max_label >= C) throw DataError("train: class id exceeds class_count");
  if (distinct.size() < 2) throw DataError("train: labels contain a single class");

  const Eigen::Index d = features.values.cols();
  LinearModel model;
  model.weights.resize(C, d);
  model.bias = Eigen::VectorXd::Zero(C);

  // Small seeded gaussian init so that distinct seeds give distinct runs.
  Rng init_rng(derive_seed(config.seed, {kStreamInit}));
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
      model.weights(r, c) = 0.01 * init_rng.next_gaussian();
    }
  }

  model.meta.seed = config.seed;
  model.meta.l2_penalty = config.l2_penalty;
  model.meta.learning_rate = config.learning_rate;
  model.meta.initial_loss =
      softmax_loss(model.weights, model.bias, features, labels, config.l2_penalty);

  const double shrink = 1.0 / (1.0 + config.learning_rate * config.l2_penalty);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed(config.seed, {kStreamTrain}));

  double prev_loss = model.meta.initial_loss;
  int epochs_run = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const std::size_t bs = stop - start;

      Eigen::MatrixXd x(static_cast<Eigen::Index>(bs), d);
      for (std::size_t i = 0; i < bs; ++i) {
        x.row(static_cast<Eigen::Index>(i)) =
            features.values.row(static_cast<Eigen::Index>(order[start + i])).cast<double>();
      }
      Eigen::MatrixXd logits = x * model.weights.transpose();
      logits.rowwise() += model.bias.transpose();
      Eigen::MatrixXd probs = softmax_rows(std::move(logits));
      for (std::size_t i = 0; i < bs; ++i) {
        probs(static_cast<Eigen::Index>(i), labels[order[start + i]]) -= 1.0;
      }
      probs /= static_cast<double>(bs);

      // Gradient step on the data term, then proximal shrinkage for the l2 term.
      model.weights.noalias() -= config.learning_rate * (probs.transpose() * x);
      model.weights *= shrink;
      model.bias -= config.learning_rate * probs.colwise().sum().transpose();
    }
    ++epochs_run;
    const double loss =
        softmax_loss(model.weights, model.bias, features, labels, config.l2_penalty);
    if (!std::isfinite(loss)) {
      throw NumericalError("train: loss diverged to a non-finite value at epoch " +
                           std::to_string(epoch + 1));
    }
    if (config.tolerance > 0.0 && std::abs(prev_loss - loss) < config.tolerance) {
      prev_loss = loss;
      break;
    }
    prev_loss = loss;
  }

  model.meta.epochs_run = epochs_run;
  model.meta.final_loss = prev_loss;
  return model;
}

std::vector<int> predict(const LinearModel& model, const FeatureMatrix& features) {
  if (features.dims() != model.dims())
    throw DataError("predict: feature dims (" + std::to_string(features.dims()) +
                    ") != model dims (" + std::to_string(model.dims()) + ")");
  const auto rows = all_rows(features);
  Eigen::MatrixXd logits = logits_for(model.weights, model.bias, features, rows);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, best)) best = static_cast<int>(c);
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

Eigen::MatrixXd predict_proba(const LinearModel& model, const FeatureMatrix& features) {
  if (features.dims() != model.dims())
    throw DataError("predict_proba: feature dims != model dims");
  const auto rows = all_rows(features);
  return softmax_rows(logits_for(model.weights, model.bias, features, rows));
}

void save_model(const LinearModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  binio::write_magic(out, "GFLM");
  binio::write_u64(out, static_cast<std::uint64_t>(model.class_count()));
  binio::write_u64(out, static_cast<std::uint64_t>(model.dims()));
  for (Eigen::Index c = 0; c < model.bias.size(); ++c) {
    binio::write_f32(out, static_cast<float>(model.bias(c)));
  }
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
      binio::write_f32(out, static_cast<float>(model.weights(r, c)));
    }
  }
}

LinearModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open model file");
  binio::expect_magic(in, "GFLM", path);
  const std::uint64_t C = binio::read_u64(in, path + " class count");
  const std::uint64_t d = binio::read_u64(in, path + " dim count");
  LinearModel model;
  model.bias.resize(static_cast<Eigen::Index>(C));
  model.weights.resize(static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(d));
  for (std::uint64_t c = 0; c < C; ++c) {
    model.bias(static_cast<Eigen::Index>(c)) = binio::read_f32(in, path + " bias");
  }
  for (std::uint64_t r = 0; r < C; ++r) {
    for (std::uint64_t c = 0; c < d; ++c) {
      model.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          binio::read_f32(in, path + " weights");
    }
  }
  if (!model.weights.allFinite() || !model.bias.allFinite())
    throw NumericalError(path + ": model contains non-finite values");
  return model;
}

}  // namespace gapfair
