#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gapfair {

// One labeled record: lowercase word tokens, a class id and a group id.
// An empty token list (e.g. an all-stopword text) is legal.
struct Example {
  std::vector<std::string> tokens;
  int class_label = 0;
  int group = 0;
};

struct Dataset {
  std::vector<Example> examples;
  std::vector<std::string> class_names;  // catalog, first-appearance order
  std::vector<std::string> group_names;

  int class_count() const { return static_cast<int>(class_names.size()); }
  int group_count() const { return static_cast<int>(group_names.size()); }
  std::size_t size() const { return examples.size(); }

  std::vector<int> labels() const;
  std::vector<int> groups() const;

  // Throws DataError when an example references a missing class/group or the
  // catalogs are smaller than 2.
  void validate() const;
};

enum class DatasetFormat { jsonl, csv };

// Reads a dataset file. JSONL: one object per line with string fields
// "text", "class", "group". CSV: header `text,class,group`, RFC-4180 quoting.
// Text is lowercased, punctuation mapped to spaces, then whitespace-split.
// Catalogs are built in first-appearance order. Errors carry line numbers.
Dataset load_dataset(const std::string& path, DatasetFormat format);

// Tokenize one text the same way load_dataset does.
std::vector<std::string> tokenize(const std::string& text);

// The default stopword list (127 words, "i" ... "now").
const std::unordered_set<std::string>& default_stopwords();

// Loads a stopword file, one word per line; blank lines ignored.
std::unordered_set<std::string> load_stopwords(const std::string& path);

// Order-preserving filter; idempotent.
std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const std::unordered_set<std::string>& stopwords);

// Applies remove_stopwords to every example of a dataset.
Dataset remove_stopwords(const Dataset& data, const std::unordered_set<std::string>& stopwords);

// Unordered symmetric word-swap pairs; no word may appear in two pairs.
struct SwapLexicon {
  std::vector<std::pair<std::string, std::string>> pairs;

  // word -> partner for both directions.
  std::unordered_map<std::string, std::string> mapping() const;

  // Validates the one-pair-per-word invariant; throws DataError.
  void validate() const;
};

// TSV, two columns per line; `#`-prefixed comment lines and blanks ignored.
SwapLexicon load_lexicon(const std::string& path);

// Replaces every lexicon word by its partner; an involution at token level.
std::vector<std::string> swap_tokens(const SwapLexicon& lexicon,
                                     const std::vector<std::string>& tokens);

struct SplitSpec {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
  bool stratified = true;  // stratify jointly on (class, group)

  void validate() const;  // fractions in [0,1], sum 1 within 1e-9
};

struct Splits {
  Dataset train;
  Dataset dev;
  Dataset test;
  // Original example indices per split, in emitted order.
  std::vector<std::size_t> train_idx, dev_idx, test_idx;
};

// Deterministic given spec.seed. Stratified mode keeps every (class, group)
// cell's proportions within one example of the requested fractions and
// requires every cell to have at least 3 members.
Splits split(const Dataset& data, const SplitSpec& spec);

// Synthetic biased-corpus generator. Tokens are drawn from a class-specific
// vocabulary ("c<k>w<j>"), mixed with group-marker words ("g<k>m<j>") at rate
// `bias`. Gaps between groups arise when cell rates are imbalanced and bias>0:
// the classifier then leans on the markers and misroutes the minority cells.
struct SyntheticConfig {
  int class_count = 2;
  int group_count = 2;
  std::int64_t n = 1000;
  // Either exact per-cell counts (size C*G, row-major by class, sum == n) or
  // per-cell rates (size C*G, normalized internally; iid-sampled per example).
  // Leave both empty for uniform cells.
  std::vector<std::int64_t> cell_counts;
  std::vector<double> cell_rates;
  double bias = 0.0;  // probability that a token is a group marker, in [0,1]
  int class_vocab = 40;
  int marker_vocab = 8;
  int min_tokens = 6;
  int max_tokens = 14;
  std::uint64_t seed = 0;

  void validate() const;
};

Dataset generate_synthetic(const SyntheticConfig& config);

// Swap lexicon pairing group 0 and group 1 marker words of a synthetic
// corpus; lets CDA run end to end on generated data. Requires G == 2.
SwapLexicon marker_lexicon(const SyntheticConfig& config);

// Writes a dataset as JSONL (normalized text = tokens joined by spaces).
void save_dataset_jsonl(const Dataset& data, const std::string& path);

}  // namespace gapfair
