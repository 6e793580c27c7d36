#include "gapfair/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gapfair/csv.hpp"
#include "gapfair/errors.hpp"
#include "gapfair/rng.hpp"

namespace gapfair {

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const Example& e : examples) out.push_back(e.class_label);
  return out;
}

std::vector<int> Dataset::groups() const {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const Example& e : examples) out.push_back(e.group);
  return out;
}

void Dataset::validate() const {
  if (class_count() < 2) throw DataError("dataset needs at least 2 classes");
  if (group_count() < 2) throw DataError("dataset needs at least 2 groups");
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& e = examples[i];
    if (e.class_label < 0 || e.class_label >= class_count())
      throw DataError("example " + std::to_string(i) + ": class id out of range");
    if (e.group < 0 || e.group >= group_count())
      throw DataError("example " + std::to_string(i) + ": group id out of range");
  }
}

std::vector<std::string> tokenize(const std::string& text) {
  std::string norm;
  norm.reserve(text.size());
  for (unsigned char c : text) {
    if (std::ispunct(c)) {
      norm.push_back(' ');
    } else {
      norm.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  std::vector<std::string> tokens;
  std::istringstream ss(norm);
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  return tokens;
}

namespace {

class CatalogBuilder {
 public:
  int intern(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(name);
    return it->second;
  }
  std::vector<std::string> take() { return std::move(names_); }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> names_;
};

Dataset load_jsonl(const std::string& path, std::ifstream& in) {
  Dataset data;
  CatalogBuilder classes, groups;
  std::string line;
  std::size_t lineno = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    any = true;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    if (!rec.is_object())
      throw DataError(path + ":" + std::to_string(lineno) + ": record is not an object");
    for (const auto& [key, _] : rec.items()) {
      if (key != "text" && key != "class" && key != "group")
        throw DataError(path + ":" + std::to_string(lineno) + ": unknown field \"" + key + "\"");
    }
    for (const char* field : {"text", "class", "group"}) {
      if (!rec.contains(field) || !rec[field].is_string())
        throw DataError(path + ":" + std::to_string(lineno) + ": missing string field \"" +
                        field + "\"");
    }
    Example e;
    e.tokens = tokenize(rec["text"].get<std::string>());
    e.class_label = classes.intern(rec["class"].get<std::string>());
    e.group = groups.intern(rec["group"].get<std::string>());
    data.examples.push_back(std::move(e));
  }
  if (!any) throw DataError(path + ": empty file");
  data.class_names = classes.take();
  data.group_names = groups.take();
  return data;
}

Dataset load_csv(const std::string& path, std::ifstream& in) {
  std::vector<std::size_t> record_lines;
  auto records = csv::read_records(in, path, &record_lines);
  if (records.empty()) throw DataError(path + ": empty file");
  const std::vector<std::string> expected = {"text", "class", "group"};
  if (records[0] != expected)
    throw DataError(path + ":1: expected header text,class,group");
  if (records.size() == 1) throw DataError(path + ": no records after header");
  Dataset data;
  CatalogBuilder classes, groups;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != 3)
      throw DataError(path + ":" + std::to_string(record_lines[r]) + ": expected 3 fields, got " +
                      std::to_string(records[r].size()));
    Example e;
    e.tokens = tokenize(records[r][0]);
    e.class_label = classes.intern(records[r][1]);
    e.group = groups.intern(records[r][2]);
    data.examples.push_back(std::move(e));
  }
  data.class_names = classes.take();
  data.group_names = groups.take();
  return data;
}

}  // namespace

Dataset load_dataset(const std::string& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open file");
  return format == DatasetFormat::jsonl ? load_jsonl(path, in) : load_csv(path, in);
}

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
      "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
      "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
      "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
      "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
      "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by",
      "for", "with", "about", "against", "between", "into", "through", "during", "before",
      "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
      "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
      "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no",
      "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
      "just", "don", "should", "now"};
  return words;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open stopword file");
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return words;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const std::unordered_set<std::string>& stopwords) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) {
    if (!stopwords.contains(t)) out.push_back(t);
  }
  return out;
}

Dataset remove_stopwords(const Dataset& data, const std::unordered_set<std::string>& stopwords) {
  Dataset out = data;
  for (Example& e : out.examples) e.tokens = remove_stopwords(e.tokens, stopwords);
  return out;
}

std::unordered_map<std::string, std::string> SwapLexicon::mapping() const {
  std::unordered_map<std::string, std::string> map;
  for (const auto& [a, b] : pairs) {
    map[a] = b;
    map[b] = a;
  }
  return map;
}

void SwapLexicon::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& [a, b] : pairs) {
    if (a == b) throw DataError("lexicon pair maps \"" + a + "\" to itself");
    if (!seen.insert(a).second) throw DataError("word \"" + a + "\" appears in two lexicon pairs");
    if (!seen.insert(b).second) throw DataError("word \"" + b + "\" appears in two lexicon pairs");
  }
}

SwapLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open lexicon file");
  SwapLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a >> b) || (ss >> extra)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected exactly two columns");
    }
    lex.pairs.emplace_back(a, b);
  }
  lex.validate();
  return lex;
}

std::vector<std::string> swap_tokens(const SwapLexicon& lexicon,
                                     const std::vector<std::string>& tokens) {
  const auto map = lexicon.mapping();
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) {
    auto it = map.find(t);
    out.push_back(it == map.end() ? t : it->second);
  }
  return out;
}

void SplitSpec::validate() const {
  for (double f : {train, dev, test}) {
    if (f < 0.0 || f > 1.0) throw DataError("split fractions must lie in [0,1]");
  }
  if (std::abs(train + dev + test - 1.0) > 1e-9)
    throw DataError("split fractions must sum to 1");
}

namespace {

// Largest-remainder allocation of n items to the three fractions; every part
// is within one of its exact target.
std::array<std::size_t, 3> allocate(std::size_t n, const SplitSpec& spec) {
  const double fracs[3] = {spec.train, spec.dev, spec.test};
  std::array<std::size_t, 3> counts{};
  double rema[3];
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    double target = fracs[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(target));
    rema[i] = target - std::floor(target);
    used += counts[i];
  }
  while (used < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (rema[i] > rema[best]) best = i;
    }
    counts[best] += 1;
    rema[best] = -1.0;
    ++used;
  }
  return counts;
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.class_names = data.class_names;
  out.group_names = data.group_names;
  out.examples.reserve(idx.size());
  for (std::size_t i : idx) out.examples.push_back(data.examples[i]);
  return out;
}

}  // namespace

Splits split(const Dataset& data, const SplitSpec& spec) {
  spec.validate();
  data.validate();
  const int C = data.class_count();
  const int G = data.group_count();

  std::vector<std::vector<std::size_t>> cells;
  if (spec.stratified) {
    cells.assign(static_cast<std::size_t>(C) * G, {});
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Example& e = data.examples[i];
      cells[static_cast<std::size_t>(e.class_label) * G + e.group].push_back(i);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!cells[c].empty() && cells[c].size() < 3) {
        throw DataError("stratified split: cell (class " + std::to_string(c / G) + ", group " +
                        std::to_string(c % G) + ") has only " + std::to_string(cells[c].size()) +
                        " examples (minimum 3)");
      }
    }
  } else {
    cells.resize(1);
    cells[0].resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) cells[0][i] = i;
  }

  Splits out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cell = cells[c];
    if (cell.empty()) continue;
    Rng rng(derive_seed(spec.seed, {kStreamSplit, c}));
    rng.shuffle(cell);
    auto counts = allocate(cell.size(), spec);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < counts[0]; ++i) out.train_idx.push_back(cell[pos++]);
    for (std::size_t i = 0; i < counts[1]; ++i) out.dev_idx.push_back(cell[pos++]);
    for (std::size_t i = 0; i < counts[2]; ++i) out.test_idx.push_back(cell[pos++]);
  }
  auto check = [&](const std::vector<std::size_t>& idx, double frac, const char* name) {
    if (idx.empty() && frac > 0.0)
      throw DataError(std::string("split produced an empty ") + name +
                      " split; dataset too small for the requested fractions");
  };
  check(out.train_idx, spec.train, "train");
  check(out.dev_idx, spec.dev, "dev");
  check(out.test_idx, spec.test, "test");
  out.train = subset(data, out.train_idx);
  out.dev = subset(data, out.dev_idx);
  out.test = subset(data, out.test_idx);
  return out;
}

void SyntheticConfig::validate() const {
  if (class_count < 2 || group_count < 2)
    throw DataError("synthetic config needs class_count >= 2 and group_count >= 2");
  if (n < static_cast<std::int64_t>(class_count) * group_count)
    throw DataError("synthetic config: n must be at least class_count * group_count");
  if (bias < 0.0 || bias > 1.0) throw DataError("synthetic config: bias must lie in [0,1]");
  if (min_tokens < 1 || max_tokens < min_tokens)
    throw DataError("synthetic config: need 1 <= min_tokens <= max_tokens");
  const std::size_t cells = static_cast<std::size_t>(class_count) * group_count;
  if (!cell_counts.empty()) {
    if (cell_counts.size() != cells)
      throw DataError("synthetic config: cell_counts must have class_count*group_count entries");
    std::int64_t sum = 0;
    for (std::int64_t v : cell_counts) {
      if (v < 0) throw DataError("synthetic config: negative cell count");
      sum += v;
    }
    if (sum != n) throw DataError("synthetic config: cell_counts must sum to n");
  }
  if (!cell_rates.empty()) {
    if (cell_rates.size() != cells)
      throw DataError("synthetic config: cell_rates must have class_count*group_count entries");
    double sum = 0;
    for (double v : cell_rates) {
      if (v < 0.0) throw DataError("synthetic config: cell rates must be non-negative");
      sum += v;
    }
    if (sum <= 0.0) throw DataError("synthetic config: cell rates sum to zero");
  }
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  const int C = config.class_count;
  const int G = config.group_count;
  const std::size_t cells = static_cast<std::size_t>(C) * G;

  Dataset data;
  for (int c = 0; c < C; ++c) data.class_names.push_back("class_" + std::to_string(c));
  for (int g = 0; g < G; ++g) data.group_names.push_back("group_" + std::to_string(g));

  Rng rng(derive_seed(config.seed, {kStreamSynthetic}));

  // Cell assignment: exact counts when given, otherwise iid draws by rate.
  std::vector<std::size_t> cell_of(static_cast<std::size_t>(config.n));
  if (!config.cell_counts.empty()) {
    std::size_t pos = 0;
    for (std::size_t c = 0; c < cells; ++c) {
      for (std::int64_t k = 0; k < config.cell_counts[c]; ++k) cell_of[pos++] = c;
    }
  } else {
    std::vector<double> cum(cells);
    double total = 0;
    for (std::size_t c = 0; c < cells; ++c) {
      total += config.cell_rates.empty() ? 1.0 : config.cell_rates[c];
      cum[c] = total;
    }
    for (auto& v : cum) v /= total;
    for (std::size_t i = 0; i < cell_of.size(); ++i) {
      double u = rng.next_double();
      std::size_t c = 0;
      while (c + 1 < cells && u >= cum[c]) ++c;
      cell_of[i] = c;
    }
  }

  data.examples.reserve(cell_of.size());
  const std::uint64_t span =
      static_cast<std::uint64_t>(config.max_tokens) - config.min_tokens + 1;
  for (std::size_t cell : cell_of) {
    Example e;
    e.class_label = static_cast<int>(cell / G);
    e.group = static_cast<int>(cell % G);
    const std::size_t len = config.min_tokens + rng.below(span);
    e.tokens.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
      if (rng.next_double() < config.bias) {
        e.tokens.push_back("g" + std::to_string(e.group) + "m" +
                           std::to_string(rng.below(config.marker_vocab)));
      } else {
        e.tokens.push_back("c" + std::to_string(e.class_label) + "w" +
                           std::to_string(rng.below(config.class_vocab)));
      }
    }
    data.examples.push_back(std::move(e));
  }
  return data;
}

SwapLexicon marker_lexicon(const SyntheticConfig& config) {
  if (config.group_count != 2)
    throw DataError("marker_lexicon requires exactly two groups");
  SwapLexicon lex;
  for (int j = 0; j < config.marker_vocab; ++j) {
    lex.pairs.emplace_back("g0m" + std::to_string(j), "g1m" + std::to_string(j));
  }
  return lex;
}

void save_dataset_jsonl(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  for (const Example& e : data.examples) {
    std::string text;
    for (std::size_t i = 0; i < e.tokens.size(); ++i) {
      if (i) text.push_back(' ');
      text += e.tokens[i];
    }
    nlohmann::json rec = {{"text", text},
                          {"class", data.class_names.at(e.class_label)},
                          {"group", data.group_names.at(e.group)}};
    out << rec.dump() << "\n";
  }
}

}  // namespace gapfair
