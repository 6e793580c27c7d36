#include "gapfair/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gapfair/errors.hpp"
#include "gapfair/rng.hpp"

using namespace gapfair;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path path = fs::temp_directory_path() / ("gapfair_corpus_" + name);
  std::ofstream out(path, std::ios::binary);
  out << contents;
  return path;
}

}  // namespace

TEST_CASE("jsonl loading maps fields and builds catalogs in first-appearance order") {
  const auto path = temp_file("basic.jsonl",
                              R"({"text":"She is a surgeon","class":"surgeon","group":"female"})"
                              "\n"
                              R"({"text":"He paints.","class":"painter","group":"male"})"
                              "\n");
  const Dataset data = load_dataset(path.string(), DatasetFormat::jsonl);
  REQUIRE(data.size() == 2);
  CHECK(data.examples[0].tokens == std::vector<std::string>{"she", "is", "a", "surgeon"});
  CHECK(data.class_names == std::vector<std::string>{"surgeon", "painter"});
  CHECK(data.group_names == std::vector<std::string>{"female", "male"});
  CHECK(data.examples[0].class_label == 0);
  CHECK(data.examples[1].group == 1);
  CHECK(data.examples[1].tokens == std::vector<std::string>{"he", "paints"});
}

TEST_CASE("a 28-class two-group corpus yields C=28, G=2") {
  std::string text;
  for (int c = 0; c < 28; ++c) {
    for (int g = 0; g < 2; ++g) {
      text += R"({"text":"job )" + std::to_string(c) + R"(","class":"p)" + std::to_string(c) +
              R"(","group":")" + (g == 0 ? "male" : "female") + "\"}\n";
    }
  }
  const auto path = temp_file("wide.jsonl", text);
  const Dataset data = load_dataset(path.string(), DatasetFormat::jsonl);
  CHECK(data.class_count() == 28);
  CHECK(data.group_count() == 2);
}

TEST_CASE("jsonl errors carry line numbers") {
  SUBCASE("missing group") {
    const auto path = temp_file("missing.jsonl",
                                R"({"text":"x","class":"a","group":"g"})"
                                "\n"
                                R"({"text":"y","class":"b"})"
                                "\n");
    CHECK_THROWS_WITH_AS(load_dataset(path.string(), DatasetFormat::jsonl),
                         doctest::Contains(":2:"), DataError);
  }
  SUBCASE("unknown field") {
    const auto path =
        temp_file("unknown.jsonl", R"({"text":"x","class":"a","group":"g","extra":1})"
                                   "\n");
    CHECK_THROWS_WITH_AS(load_dataset(path.string(), DatasetFormat::jsonl),
                         doctest::Contains("unknown field"), DataError);
  }
  SUBCASE("empty file") {
    const auto path = temp_file("empty.jsonl", "");
    CHECK_THROWS_WITH_AS(load_dataset(path.string(), DatasetFormat::jsonl),
                         doctest::Contains("empty"), DataError);
  }
  SUBCASE("malformed json") {
    const auto path = temp_file("bad.jsonl", "{not json\n");
    CHECK_THROWS_WITH_AS(load_dataset(path.string(), DatasetFormat::jsonl),
                         doctest::Contains(":1:"), DataError);
  }
}

TEST_CASE("csv loading handles quoted text with commas and newlines") {
  const auto path = temp_file("basic.csv",
                              "text,class,group\n"
                              "\"Hello, world\",a,g0\n"
                              "\"two\nlines\",b,g1\n");
  const Dataset data = load_dataset(path.string(), DatasetFormat::csv);
  REQUIRE(data.size() == 2);
  CHECK(data.examples[0].tokens == std::vector<std::string>{"hello", "world"});
  CHECK(data.examples[1].tokens == std::vector<std::string>{"two", "lines"});

  const auto bad = temp_file("badheader.csv", "body,class,group\nx,a,g\n");
  CHECK_THROWS_WITH_AS(load_dataset(bad.string(), DatasetFormat::csv),
                       doctest::Contains("header"), DataError);
}

TEST_CASE("stopword filtering") {
  const auto& stop = default_stopwords();
  CHECK(stop.size() == 127);
  CHECK(stop.contains("i"));
  CHECK(stop.contains("she"));
  CHECK(stop.contains("now"));
  CHECK(stop.contains("don"));

  SUBCASE("paper example: she is a surgeon -> surgeon") {
    CHECK(remove_stopwords({"she", "is", "a", "surgeon"}, stop) ==
          std::vector<std::string>{"surgeon"});
  }
  SUBCASE("empty input") {
    CHECK(remove_stopwords(std::vector<std::string>{}, stop).empty());
  }
  SUBCASE("no stopwords present") {
    CHECK(remove_stopwords({"surgeon", "surgeon"}, stop) ==
          std::vector<std::string>{"surgeon", "surgeon"});
  }
  SUBCASE("idempotence over random token lists") {
    Rng rng(7);
    const std::vector<std::string> pool = {"she", "is", "surgeon", "a",    "the",
                                           "nurse", "i", "paints", "works"};
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::string> tokens;
      const std::size_t len = rng.below(12);
      for (std::size_t i = 0; i < len; ++i) tokens.push_back(pool[rng.below(pool.size())]);
      const auto once = remove_stopwords(tokens, stop);
      CHECK(remove_stopwords(once, stop) == once);
    }
  }
}

TEST_CASE("stopword file loading") {
  const auto path = temp_file("stop.txt", "alpha\nbeta\n\ngamma\n");
  const auto words = load_stopwords(path.string());
  CHECK(words.size() == 3);
  CHECK(words.contains("beta"));
}

TEST_CASE("lexicon loading and validation") {
  const auto path = temp_file("lex.tsv", "# comment\nshe\the\nwoman\tman\n");
  const SwapLexicon lex = load_lexicon(path.string());
  REQUIRE(lex.pairs.size() == 2);
  CHECK(swap_tokens(lex, {"she", "is", "a", "woman"}) ==
        std::vector<std::string>{"he", "is", "a", "man"});
  CHECK(swap_tokens(lex, {"he"}) == std::vector<std::string>{"she"});

  const auto dup = temp_file("dup.tsv", "she\the\nshe\ther\n");
  CHECK_THROWS_AS(load_lexicon(dup.string()), DataError);

  SwapLexicon self;
  self.pairs = {{"x", "x"}};
  CHECK_THROWS_AS(self.validate(), DataError);
}

TEST_CASE("the shipped gender lexicon is valid and swaps the canonical example") {
  const SwapLexicon lex =
      load_lexicon(std::string(GAPFAIR_SOURCE_DIR) + "/data/lexicons/gender_pairs.tsv");
  CHECK_NOTHROW(lex.validate());
  CHECK(swap_tokens(lex, {"she", "is", "happy"}) == std::vector<std::string>{"he", "is", "happy"});
}

namespace {

Dataset uniform_dataset(int n, int C, int G, std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.class_count = C;
  cfg.group_count = G;
  cfg.n = n;
  cfg.seed = seed;
  return generate_synthetic(cfg);
}

}  // namespace

TEST_CASE("split: 100 examples at 0.8/0.1/0.1 gives 80/10/10 and is deterministic") {
  const Dataset data = uniform_dataset(100, 2, 2, 11);
  SplitSpec spec;
  spec.seed = 7;
  spec.stratified = false;
  const Splits a = split(data, spec);
  CHECK(a.train.size() == 80);
  CHECK(a.dev.size() == 10);
  CHECK(a.test.size() == 10);
  const Splits b = split(data, spec);
  CHECK(a.train_idx == b.train_idx);
  CHECK(a.dev_idx == b.dev_idx);
  CHECK(a.test_idx == b.test_idx);
}

TEST_CASE("split partitions the dataset") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 60 + static_cast<int>(rng.below(200));
    const Dataset data = uniform_dataset(n, 2 + static_cast<int>(rng.below(3)), 2, trial);
    SplitSpec spec;
    spec.seed = rng.next_u64();
    spec.stratified = trial % 2 == 0;
    const Splits s = split(data, spec);
    std::vector<std::size_t> all;
    all.insert(all.end(), s.train_idx.begin(), s.train_idx.end());
    all.insert(all.end(), s.dev_idx.begin(), s.dev_idx.end());
    all.insert(all.end(), s.test_idx.begin(), s.test_idx.end());
    CHECK(all.size() == data.size());
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(all.back() == data.size() - 1);
  }
}

TEST_CASE("stratified split keeps cell proportions within one example") {
  SyntheticConfig cfg;
  cfg.class_count = 3;
  cfg.group_count = 2;
  cfg.n = 600;
  cfg.cell_counts = {200, 100, 80, 120, 60, 40};
  cfg.seed = 5;
  const Dataset data = generate_synthetic(cfg);
  SplitSpec spec;
  spec.seed = 9;
  const Splits s = split(data, spec);
  auto cell_count = [&](const Dataset& d, int c, int g) {
    std::int64_t k = 0;
    for (const Example& e : d.examples) {
      if (e.class_label == c && e.group == g) ++k;
    }
    return k;
  };
  for (int c = 0; c < 3; ++c) {
    for (int g = 0; g < 2; ++g) {
      const double cell = static_cast<double>(cell_count(data, c, g));
      CHECK(std::abs(cell_count(s.train, c, g) - 0.8 * cell) <= 1.0);
      CHECK(std::abs(cell_count(s.dev, c, g) - 0.1 * cell) <= 1.0);
      CHECK(std::abs(cell_count(s.test, c, g) - 0.1 * cell) <= 1.0);
    }
  }
}

TEST_CASE("stratified split rejects tiny cells") {
  Dataset data;
  data.class_names = {"a", "b"};
  data.group_names = {"g0", "g1"};
  for (int i = 0; i < 10; ++i) data.examples.push_back({{"w"}, i % 2, 0});
  data.examples.push_back({{"w"}, 0, 1});  // cell (0, g1) has size 1
  for (int i = 0; i < 5; ++i) data.examples.push_back({{"w"}, 1, 1});
  SplitSpec spec;
  CHECK_THROWS_WITH_AS(split(data, spec), doctest::Contains("minimum 3"), DataError);
}

TEST_CASE("split spec validation") {
  SplitSpec spec;
  spec.train = 0.5;
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec.train = 1.2;
  spec.dev = -0.1;
  CHECK_THROWS_AS(spec.validate(), DataError);
}

TEST_CASE("synthetic generator honours explicit cell counts exactly") {
  SyntheticConfig cfg;
  cfg.class_count = 2;
  cfg.group_count = 2;
  cfg.n = 240;
  cfg.cell_counts = {100, 10, 30, 100};
  cfg.seed = 77;
  const Dataset data = generate_synthetic(cfg);
  // brute-force histogram
  std::vector<std::int64_t> hist(4, 0);
  for (const Example& e : data.examples) hist[static_cast<std::size_t>(e.class_label * 2 + e.group)]++;
  CHECK(hist == std::vector<std::int64_t>{100, 10, 30, 100});
}

TEST_CASE("synthetic generator is deterministic per seed") {
  SyntheticConfig cfg;
  cfg.class_count = 4;
  cfg.group_count = 2;
  cfg.n = 2000;
  cfg.bias = 0.8;
  cfg.seed = 1;
  const Dataset a = generate_synthetic(cfg);
  const Dataset b = generate_synthetic(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.examples[i].tokens == b.examples[i].tokens);
    CHECK(a.examples[i].class_label == b.examples[i].class_label);
    CHECK(a.examples[i].group == b.examples[i].group);
  }
}

TEST_CASE("synthetic generator: cell frequencies stay within 3 sigma of the rates") {
  SyntheticConfig cfg;
  cfg.class_count = 2;
  cfg.group_count = 2;
  cfg.n = 20000;
  cfg.cell_rates = {0.4, 0.1, 0.2, 0.3};
  cfg.seed = 13;
  const Dataset data = generate_synthetic(cfg);
  std::vector<std::int64_t> hist(4, 0);
  for (const Example& e : data.examples) hist[static_cast<std::size_t>(e.class_label * 2 + e.group)]++;
  for (std::size_t cell = 0; cell < 4; ++cell) {
    const double p = cfg.cell_rates[cell];
    const double sigma = std::sqrt(p * (1 - p) * static_cast<double>(cfg.n));
    CHECK(std::abs(static_cast<double>(hist[cell]) - p * static_cast<double>(cfg.n)) <=
          3.0 * sigma);
  }
}

TEST_CASE("synthetic generator: bias 0 plants no group markers") {
  SyntheticConfig cfg;
  cfg.class_count = 2;
  cfg.group_count = 2;
  cfg.n = 400;
  cfg.bias = 0.0;
  cfg.seed = 3;
  const Dataset data = generate_synthetic(cfg);
  for (const Example& e : data.examples) {
    for (const std::string& t : e.tokens) CHECK(t[0] == 'c');
  }
}

TEST_CASE("synthetic generator validation") {
  SyntheticConfig cfg;
  cfg.class_count = 4;
  cfg.group_count = 2;
  cfg.n = 7;  // < C*G
  CHECK_THROWS_AS(generate_synthetic(cfg), DataError);
}

TEST_CASE("marker lexicon pairs the two groups' markers") {
  SyntheticConfig cfg;
  cfg.marker_vocab = 3;
  const SwapLexicon lex = marker_lexicon(cfg);
  REQUIRE(lex.pairs.size() == 3);
  CHECK(swap_tokens(lex, {"g0m1", "c0w2"}) == std::vector<std::string>{"g1m1", "c0w2"});
  cfg.group_count = 3;
  CHECK_THROWS_AS(marker_lexicon(cfg), DataError);
}

TEST_CASE("dataset jsonl round-trip through save") {
  const Dataset data = uniform_dataset(50, 2, 2, 21);
  const fs::path path = fs::temp_directory_path() / "gapfair_roundtrip.jsonl";
  save_dataset_jsonl(data, path.string());
  const Dataset back = load_dataset(path.string(), DatasetFormat::jsonl);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back.examples[i].tokens == data.examples[i].tokens);
  }
}
