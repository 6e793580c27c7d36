#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "gapfair/corpus.hpp"

namespace gapfair {

using RowMajorMatrixF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense n x d feature matrix. Storage is 32-bit; accumulation that produces
// these values is done in 64-bit. row_ids aligns rows with dataset indices.
struct FeatureMatrix {
  RowMajorMatrixF values;
  std::vector<std::int64_t> row_ids;

  std::int64_t rows() const { return values.rows(); }
  std::int64_t dims() const { return values.cols(); }

  // Throws NumericalError naming the first offending row/column.
  void validate_finite() const;
};

// Frozen after fit; unknown terms at transform time are dropped.
struct Vocabulary {
  std::vector<std::string> terms;               // column -> term, alphabetical
  std::unordered_map<std::string, int> columns; // term -> column
  std::vector<std::int64_t> doc_freq;           // column -> document frequency
  std::int64_t fitted_docs = 0;
  std::int64_t min_df = 1;
  std::int64_t max_features = 0;  // 0 = unlimited
  bool tfidf = false;

  int dims() const { return static_cast<int>(terms.size()); }
};

// Selects the max_features terms of highest document frequency with
// df >= min_df (ties broken alphabetically); columns ordered alphabetically.
Vocabulary fit_bow(const Dataset& train, std::int64_t min_df, std::int64_t max_features,
                   bool tfidf);

// Raw counts, or TF-IDF with idf = ln((1+n)/(1+df)) + 1 and L2 row
// normalization. Rows without in-vocabulary terms are zero.
FeatureMatrix transform(const Vocabulary& vocab, const Dataset& data);

// GFEM file: magic "GFEM", u64 n, u64 d, then n*d little-endian f32, row-major.
FeatureMatrix load_embeddings(const std::string& path);
void save_embeddings(const FeatureMatrix& features, const std::string& path);

}  // namespace gapfair
