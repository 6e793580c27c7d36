#include "gapfair/features.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gapfair/binio.hpp"
#include "gapfair/errors.hpp"
#include "gapfair/rng.hpp"

using namespace gapfair;
namespace fs = std::filesystem;

namespace {

Dataset corpus_of(const std::vector<std::vector<std::string>>& docs) {
  Dataset d;
  d.class_names = {"a", "b"};
  d.group_names = {"g0", "g1"};
  for (std::size_t i = 0; i < docs.size(); ++i) {
    d.examples.push_back({docs[i], static_cast<int>(i % 2), static_cast<int>(i % 2)});
  }
  return d;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("fit_bow counts document frequencies, not term frequencies") {
  // df(a)=1, df(b)=2, df(c)=1 by hand
  const Dataset d = corpus_of({{"a", "b"}, {"b", "c"}});
  const Vocabulary v = fit_bow(d, 2, 0, false);
  REQUIRE(v.terms == std::vector<std::string>{"b"});
  CHECK(v.doc_freq == std::vector<std::int64_t>{2});
  CHECK(v.fitted_docs == 2);
}

TEST_CASE("fit_bow tie-break is alphabetical") {
  const Dataset d = corpus_of({{"b", "c"}, {"c", "b"}});
  const Vocabulary v = fit_bow(d, 1, 1, false);
  CHECK(v.terms == std::vector<std::string>{"b"});
}

TEST_CASE("fit_bow repeated tokens count once per document") {
  const Dataset d = corpus_of({{"x", "x", "x"}, {"y"}});
  const Vocabulary v = fit_bow(d, 1, 0, false);
  REQUIRE(v.terms == std::vector<std::string>{"x", "y"});
  CHECK(v.doc_freq == std::vector<std::int64_t>{1, 1});
}

TEST_CASE("fit_bow errors when the vocabulary filters to nothing") {
  const Dataset d = corpus_of({{"a"}, {"b"}});
  CHECK_THROWS_AS(fit_bow(d, 5, 0, false), DataError);
  Dataset empty;
  empty.class_names = {"a", "b"};
  empty.group_names = {"g0", "g1"};
  CHECK_THROWS_AS(fit_bow(empty, 1, 0, false), DataError);
}

TEST_CASE("transform: counts") {
  const Dataset train = corpus_of({{"b"}, {"b"}});
  const Vocabulary v = fit_bow(train, 1, 0, false);
  const Dataset data = corpus_of({{"b", "b"}, {"z"}});
  const FeatureMatrix x = transform(v, data);
  REQUIRE(x.rows() == 2);
  REQUIRE(x.dims() == 1);
  CHECK(x.values(0, 0) == 2.0f);   // [b,b] -> [2]
  CHECK(x.values(1, 0) == 0.0f);   // out-of-vocabulary -> zero row
}

TEST_CASE("transform: count row sums equal in-vocabulary token counts (brute force)") {
  Rng rng(17);
  const std::vector<std::string> pool = {"u", "v", "w", "x", "y", "z"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<std::string>> docs;
    for (int i = 0; i < 8; ++i) {
      std::vector<std::string> doc;
      const std::size_t len = rng.below(10);
      for (std::size_t t = 0; t < len; ++t) doc.push_back(pool[rng.below(pool.size())]);
      docs.push_back(doc);
    }
    const Dataset d = corpus_of(docs);
    const Vocabulary v = fit_bow(d, 2, 4, false);
    const FeatureMatrix x = transform(v, d);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      std::int64_t in_vocab = 0;
      for (const std::string& t : docs[i]) {
        if (v.columns.contains(t)) ++in_vocab;
      }
      CHECK(x.values.row(static_cast<Eigen::Index>(i)).sum() ==
            doctest::Approx(static_cast<double>(in_vocab)));
    }
  }
}

TEST_CASE("transform: tf-idf matches the stated formula on a hand example") {
  // train: doc0={b}, doc1={b,c}; df(b)=2, df(c)=1, n=2
  // idf(b) = ln(3/3)+1 = 1; idf(c) = ln(3/2)+1
  const Dataset train = corpus_of({{"b"}, {"b", "c"}});
  const Vocabulary v = fit_bow(train, 1, 0, true);
  const Dataset data = corpus_of({{"b", "c", "c"}, {"q"}});
  const FeatureMatrix x = transform(v, data);
  const double idf_b = 1.0;
  const double idf_c = std::log(3.0 / 2.0) + 1.0;
  const double raw_b = 1.0 * idf_b, raw_c = 2.0 * idf_c;
  const double norm = std::sqrt(raw_b * raw_b + raw_c * raw_c);
  CHECK(x.values(0, 0) == doctest::Approx(raw_b / norm).epsilon(1e-6));
  CHECK(x.values(0, 1) == doctest::Approx(raw_c / norm).epsilon(1e-6));
  CHECK(x.values(1, 0) == 0.0f);
}

TEST_CASE("transform: tf-idf rows have L2 norm one or zero") {
  Rng rng(23);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "oov1", "oov2"};
  std::vector<std::vector<std::string>> docs;
  for (int i = 0; i < 30; ++i) {
    std::vector<std::string> doc;
    const std::size_t len = rng.below(8);
    for (std::size_t t = 0; t < len; ++t) doc.push_back(pool[rng.below(pool.size())]);
    docs.push_back(doc);
  }
  const Dataset d = corpus_of(docs);
  const Vocabulary v = fit_bow(d, 2, 5, true);
  const FeatureMatrix x = transform(v, d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double norm = x.values.row(i).cast<double>().norm();
    CHECK((std::abs(norm - 1.0) < 1e-6 || norm == 0.0));
  }
}

TEST_CASE("embedding files round-trip byte-identically") {
  FeatureMatrix m;
  m.values.resize(3, 4);
  Rng rng(31);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      m.values(i, j) = static_cast<float>(rng.next_gaussian());
    }
  }
  m.row_ids = {0, 1, 2};
  const fs::path path = fs::temp_directory_path() / "gapfair_emb.gfem";
  save_embeddings(m, path.string());
  const FeatureMatrix back = load_embeddings(path.string());
  REQUIRE(back.rows() == 3);
  REQUIRE(back.dims() == 4);
  CHECK(back.values == m.values);

  const fs::path second = fs::temp_directory_path() / "gapfair_emb2.gfem";
  save_embeddings(back, second.string());
  CHECK(file_bytes(path) == file_bytes(second));
}

TEST_CASE("embedding loader rejects malformed files") {
  const fs::path path = fs::temp_directory_path() / "gapfair_emb_bad.gfem";
  SUBCASE("payload shorter than the header promises") {
    std::ofstream out(path, std::ios::binary);
    binio::write_magic(out, "GFEM");
    binio::write_u64(out, 3);
    binio::write_u64(out, 4);
    for (int i = 0; i < 11; ++i) binio::write_f32(out, 1.0f);  // one float short
    out.close();
    CHECK_THROWS_WITH_AS(load_embeddings(path.string()), doctest::Contains("truncated"),
                         DataError);
  }
  SUBCASE("NaN entry is reported with row and column") {
    std::ofstream out(path, std::ios::binary);
    binio::write_magic(out, "GFEM");
    binio::write_u64(out, 2);
    binio::write_u64(out, 2);
    binio::write_f32(out, 1.0f);
    binio::write_f32(out, 2.0f);
    binio::write_f32(out, std::numeric_limits<float>::quiet_NaN());
    binio::write_f32(out, 4.0f);
    out.close();
    CHECK_THROWS_WITH_AS(load_embeddings(path.string()), doctest::Contains("row 1, column 0"),
                         DataError);
  }
  SUBCASE("bad magic") {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE";
    out.close();
    CHECK_THROWS_WITH_AS(load_embeddings(path.string()), doctest::Contains("magic"), DataError);
  }
  SUBCASE("trailing bytes") {
    std::ofstream out(path, std::ios::binary);
    binio::write_magic(out, "GFEM");
    binio::write_u64(out, 1);
    binio::write_u64(out, 1);
    binio::write_f32(out, 1.0f);
    out << "x";
    out.close();
    CHECK_THROWS_WITH_AS(load_embeddings(path.string()), doctest::Contains("trailing"), DataError);
  }
}

TEST_CASE("transform is deterministic") {
  const Dataset d = corpus_of({{"a", "b", "c"}, {"b", "c"}, {"c"}});
  const Vocabulary v = fit_bow(d, 1, 0, true);
  const FeatureMatrix x1 = transform(v, d);
  const FeatureMatrix x2 = transform(v, d);
  CHECK(x1.values == x2.values);
}
