#include "gapfair/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "gapfair/binio.hpp"
#include "gapfair/errors.hpp"

namespace gapfair {

void FeatureMatrix::validate_finite() const {
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (!std::isfinite(values(r, c))) {
        throw NumericalError("non-finite feature value at row " + std::to_string(r) +
                             ", column " + std::to_string(c));
      }
    }
  }
}

Vocabulary fit_bow(const Dataset& train, std::int64_t min_df, std::int64_t max_features,
                   bool tfidf) {
  if (train.examples.empty()) throw DataError("fit_bow: empty training set");
  if (min_df < 1) throw DataError("fit_bow: min_df must be >= 1");

  std::unordered_map<std::string, std::int64_t> df;
  std::unordered_set<std::string> seen;
  for (const Example& e : train.examples) {
    seen.clear();
    for (const std::string& t : e.tokens) seen.insert(t);
    for (const std::string& t : seen) ++df[t];
  }

  std::vector<std::pair<std::string, std::int64_t>> candidates;
  candidates.reserve(df.size());
  for (auto& [term, count] : df) {
    if (count >= min_df) candidates.emplace_back(term, count);
  }
  if (candidates.empty())
    throw DataError("fit_bow: vocabulary is empty after min_df=" + std::to_string(min_df) +
                    " filtering");

  // Selection order: highest df first, alphabetical on ties.
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (max_features > 0 && static_cast<std::int64_t>(candidates.size()) > max_features) {
    candidates.resize(static_cast<std::size_t>(max_features));
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  Vocabulary vocab;
  vocab.fitted_docs = static_cast<std::int64_t>(train.examples.size());
  vocab.min_df = min_df;
  vocab.max_features = max_features;
  vocab.tfidf = tfidf;
  vocab.terms.reserve(candidates.size());
  vocab.doc_freq.reserve(candidates.size());
  for (auto& [term, count] : candidates) {
    vocab.columns.emplace(term, static_cast<int>(vocab.terms.size()));
    vocab.terms.push_back(term);
    vocab.doc_freq.push_back(count);
  }
  return vocab;
}

FeatureMatrix transform(const Vocabulary& vocab, const Dataset& data) {
  if (vocab.terms.empty()) throw DataError("transform: vocabulary not fitted");
  const Eigen::Index n = static_cast<Eigen::Index>(data.examples.size());
  const Eigen::Index d = vocab.dims();

  std::vector<double> idf;
  if (vocab.tfidf) {
    idf.resize(static_cast<std::size_t>(d));
    for (Eigen::Index c = 0; c < d; ++c) {
      idf[static_cast<std::size_t>(c)] =
          std::log((1.0 + static_cast<double>(vocab.fitted_docs)) /
                   (1.0 + static_cast<double>(vocab.doc_freq[static_cast<std::size_t>(c)]))) +
          1.0;
    }
  }

  FeatureMatrix out;
  out.values.setZero(n, d);
  out.row_ids.resize(static_cast<std::size_t>(n));
  std::vector<double> row(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.row_ids[static_cast<std::size_t>(i)] = i;
    std::fill(row.begin(), row.end(), 0.0);
    for (const std::string& t : data.examples[static_cast<std::size_t>(i)].tokens) {
      auto it = vocab.columns.find(t);
      if (it != vocab.columns.end()) row[static_cast<std::size_t>(it->second)] += 1.0;
    }
    if (vocab.tfidf) {
      double sq = 0.0;
      for (std::size_t c = 0; c < row.size(); ++c) {
        row[c] *= idf[c];
        sq += row[c] * row[c];
      }
      if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (double& v : row) v *= inv;
      }
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      out.values(i, c) = static_cast<float>(row[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

FeatureMatrix load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open embedding file");
  binio::expect_magic(in, "GFEM", path);
  const std::uint64_t n = binio::read_u64(in, path + " row count");
  const std::uint64_t d = binio::read_u64(in, path + " dim count");

  FeatureMatrix out;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  out.row_ids.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) out.row_ids[i] = static_cast<std::int64_t>(i);
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < d; ++j) {
      const float v = binio::read_f32(in, path + " payload");
      if (!std::isfinite(v)) {
        throw DataError(path + ": non-finite value at row " + std::to_string(i) + ", column " +
                        std::to_string(j));
      }
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  char extra;
  if (in.read(&extra, 1))
    throw DataError(path + ": trailing bytes after declared payload");
  return out;
}

void save_embeddings(const FeatureMatrix& features, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  binio::write_magic(out, "GFEM");
  binio::write_u64(out, static_cast<std::uint64_t>(features.rows()));
  binio::write_u64(out, static_cast<std::uint64_t>(features.dims()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.dims(); ++j) {
      binio::write_f32(out, features.values(i, j));
    }
  }
}

}  // namespace gapfair
