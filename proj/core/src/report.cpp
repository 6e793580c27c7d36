#include "gapfair/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "gapfair/csv.hpp"
#include "gapfair/errors.hpp"

namespace gapfair {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_double(const std::string& s, const std::string& context) {
  if (s.empty()) return kNaN;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(context + ": not a number: \"" + s + "\"");
  }
}

// Shortest exact decimal form; NaN becomes the empty field.
std::string format_full(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_2dp(double v) {
  if (std::isnan(v)) return "-";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double json_number(const nlohmann::json& j) {
  if (j.is_null()) return kNaN;
  return j.get<double>();
}

nlohmann::json eval_to_json(const EvalResult& e) {
  nlohmann::json j;
  j["class_names"] = e.class_names;
  j["group_names"] = e.group_names;
  j["accuracy"] = number_or_null(e.accuracy);
  j["gap_rms"] = number_or_null(e.gap_rms);
  j["undefined_gap_count"] = e.undefined_gap_count;
  j["tpr"] = nlohmann::json::array();
  for (double v : e.tpr) j["tpr"].push_back(number_or_null(v));
  j["support"] = e.support;
  j["group_tpr"] = nlohmann::json::array();
  for (double v : e.group_tpr) j["group_tpr"].push_back(number_or_null(v));
  j["gap"] = nlohmann::json::array();
  for (double v : e.gap) j["gap"].push_back(number_or_null(v));
  return j;
}

EvalResult eval_from_json(const nlohmann::json& j) {
  EvalResult e;
  e.class_names = j.at("class_names").get<std::vector<std::string>>();
  e.group_names = j.at("group_names").get<std::vector<std::string>>();
  e.accuracy = json_number(j.at("accuracy"));
  e.gap_rms = json_number(j.at("gap_rms"));
  e.undefined_gap_count = j.at("undefined_gap_count").get<int>();
  for (const auto& v : j.at("tpr")) e.tpr.push_back(json_number(v));
  e.support = j.at("support").get<std::vector<std::int64_t>>();
  for (const auto& v : j.at("group_tpr")) e.group_tpr.push_back(json_number(v));
  for (const auto& v : j.at("gap")) e.gap.push_back(json_number(v));
  return e;
}

std::string slugify(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

}  // namespace

PaperTable load_paper_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open fixture file");
  std::vector<std::size_t> lines;
  const auto records = csv::read_records(in, path, &lines);
  if (records.empty()) throw DataError(path + ": empty fixture");
  const std::vector<std::string> header = {"class",      "tpr_m_orig", "tpr_m_deb",
                                           "tpr_f_orig", "tpr_f_deb",  "gap_orig",
                                           "gap_deb",    "base",       "advanced"};
  if (records[0] != header)
    throw DataError(path + ":1: expected header "
                           "class,tpr_m_orig,tpr_m_deb,tpr_f_orig,tpr_f_deb,gap_orig,gap_deb,"
                           "base,advanced");
  if (records.size() == 1) throw DataError(path + ": fixture has no rows");

  PaperTable table;
  const std::string stem = path.substr(path.find_last_of("/\\") + 1);
  table.method = stem.substr(0, stem.find('.'));
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = path + ":" + std::to_string(lines[r]);
    if (rec.size() != 9) throw DataError(where + ": expected 9 fields");
    PaperRow row;
    row.class_name = rec[0];
    if (row.class_name.empty()) throw DataError(where + ": empty class name");
    double* cells[6] = {&row.tpr_m_orig, &row.tpr_m_deb, &row.tpr_f_orig,
                        &row.tpr_f_deb,  &row.gap_orig,  &row.gap_deb};
    for (int i = 0; i < 6; ++i) {
      if (rec[static_cast<std::size_t>(i) + 1].empty())
        throw DataError(where + ": missing cell " + header[static_cast<std::size_t>(i) + 1]);
      *cells[i] = parse_double(rec[static_cast<std::size_t>(i) + 1], where);
    }
    if (row.gap_orig < 0 || row.gap_deb < 0)
      throw DataError(where + ": gap columns must be non-negative");
    row.base_flag = rec[7] == "1";
    row.advanced_flag = rec[8] == "1";
    table.rows.push_back(std::move(row));
  }
  return table;
}

ReplayReport replay_paper_table(const PaperTable& table, double epsilon_gap,
                                double epsilon_harm) {
  if (table.rows.empty()) throw DataError("replay: fixture has no rows");

  EvalResult before, after;
  before.group_names = after.group_names = {"male", "female"};
  for (const PaperRow& row : table.rows) {
    before.class_names.push_back(row.class_name);
    before.tpr.push_back(row.tpr_m_orig);
    before.tpr.push_back(row.tpr_f_orig);
    after.tpr.push_back(row.tpr_m_deb);
    after.tpr.push_back(row.tpr_f_deb);
    // The published gap column is the run-averaged unsigned gap; it is not
    // recomputed from the TPR columns.
    before.gap.push_back(row.gap_orig);
    after.gap.push_back(row.gap_deb);
  }
  after.class_names = before.class_names;
  before.support.assign(before.tpr.size(), 1);
  after.support.assign(after.tpr.size(), 1);
  before.group_tpr.assign(2, kNaN);
  after.group_tpr.assign(2, kNaN);
  before.accuracy = after.accuracy = kNaN;
  before.gap_rms = gap_rms(before.gap);
  after.gap_rms = gap_rms(after.gap);

  ReplayReport replay;
  replay.rms_orig = before.gap_rms;
  replay.rms_deb = after.gap_rms;
  const std::vector<std::int64_t> populations(table.rows.size(), 1);
  replay.comparison = compare(before, after, populations, epsilon_gap, epsilon_harm);

  for (std::size_t c = 0; c < table.rows.size(); ++c) {
    const SatisfactionVerdict& v = replay.comparison.verdicts[c];
    if (v.base) ++replay.base_count;
    if (v.advanced) ++replay.advanced_count;
    if (v.base != table.rows[c].base_flag || v.advanced != table.rows[c].advanced_flag) {
      replay.verdict_diff.push_back({table.rows[c].class_name, v.base, v.advanced,
                                     table.rows[c].base_flag, table.rows[c].advanced_flag});
    }
  }
  return replay;
}

void write_report_json(const ComparisonReport& report, const std::string& path) {
  nlohmann::json j;
  j["schema"] = "gapfair.comparison/1";
  j["epsilon_gap"] = report.epsilon_gap;
  j["epsilon_harm"] = report.epsilon_harm;
  j["before"] = eval_to_json(report.before);
  j["after"] = eval_to_json(report.after);
  j["class_populations"] = report.class_populations;
  j["verdicts"] = nlohmann::json::array();
  for (const SatisfactionVerdict& v : report.verdicts) {
    j["verdicts"].push_back({{"defined", v.defined},
                             {"protected_group", v.protected_group},
                             {"protected_tie", v.protected_tie},
                             {"gap_decreased", v.gap_decreased},
                             {"protected_no_harm", v.protected_no_harm},
                             {"others_no_harm", v.others_no_harm},
                             {"base", v.base},
                             {"advanced", v.advanced}});
  }
  j["deltas"] = nlohmann::json::array();
  for (const ClassDelta& d : report.deltas) {
    nlohmann::json tpr = nlohmann::json::array();
    for (double v : d.tpr_delta) tpr.push_back(number_or_null(v));
    j["deltas"].push_back({{"tpr_delta", tpr}, {"gap_delta", number_or_null(d.gap_delta)}});
  }
  j["summary"] = {{"unweighted_base_rate", report.unweighted_base_rate},
                  {"unweighted_advanced_rate", report.unweighted_advanced_rate},
                  {"weighted_base_rate", report.weighted_base_rate},
                  {"weighted_advanced_rate", report.weighted_advanced_rate},
                  {"worsened_gap_fraction", report.worsened_gap_fraction},
                  {"worsened_gap_count", report.worsened_gap_count},
                  {"judged_class_count", report.judged_class_count},
                  {"excluded_class_count", report.excluded_class_count}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

ComparisonReport read_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open report file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed JSON: " + e.what());
  }
  if (j.value("schema", "") != "gapfair.comparison/1")
    throw DataError(path + ": unknown report schema");

  ComparisonReport r;
  r.epsilon_gap = j.at("epsilon_gap").get<double>();
  r.epsilon_harm = j.at("epsilon_harm").get<double>();
  r.before = eval_from_json(j.at("before"));
  r.after = eval_from_json(j.at("after"));
  r.class_populations = j.at("class_populations").get<std::vector<std::int64_t>>();
  for (const auto& v : j.at("verdicts")) {
    SatisfactionVerdict sv;
    sv.defined = v.at("defined").get<bool>();
    sv.protected_group = v.at("protected_group").get<int>();
    sv.protected_tie = v.at("protected_tie").get<bool>();
    sv.gap_decreased = v.at("gap_decreased").get<bool>();
    sv.protected_no_harm = v.at("protected_no_harm").get<bool>();
    sv.others_no_harm = v.at("others_no_harm").get<bool>();
    sv.base = v.at("base").get<bool>();
    sv.advanced = v.at("advanced").get<bool>();
    r.verdicts.push_back(sv);
  }
  for (const auto& d : j.at("deltas")) {
    ClassDelta cd;
    for (const auto& v : d.at("tpr_delta")) cd.tpr_delta.push_back(json_number(v));
    cd.gap_delta = json_number(d.at("gap_delta"));
    r.deltas.push_back(std::move(cd));
  }
  const auto& s = j.at("summary");
  r.unweighted_base_rate = s.at("unweighted_base_rate").get<double>();
  r.unweighted_advanced_rate = s.at("unweighted_advanced_rate").get<double>();
  r.weighted_base_rate = s.at("weighted_base_rate").get<double>();
  r.weighted_advanced_rate = s.at("weighted_advanced_rate").get<double>();
  r.worsened_gap_fraction = s.at("worsened_gap_fraction").get<double>();
  r.worsened_gap_count = s.at("worsened_gap_count").get<int>();
  r.judged_class_count = s.at("judged_class_count").get<int>();
  r.excluded_class_count = s.at("excluded_class_count").get<int>();
  return r;
}

void write_report_csv(const ComparisonReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  const int G = report.before.group_count();
  const int C = report.before.class_count();

  // Summary block: variable-arity key rows, then a blank line, then the
  // per-class table. The reader below understands exactly this layout.
  out << "key,values\n";
  out << "schema,gapfair.comparison/1\n";
  out << "epsilon_gap," << format_full(report.epsilon_gap) << "\n";
  out << "epsilon_harm," << format_full(report.epsilon_harm) << "\n";
  out << "group_names";
  for (const std::string& g : report.before.group_names) out << "," << csv::escape(g);
  out << "\n";
  out << "accuracy," << format_full(report.before.accuracy) << ","
      << format_full(report.after.accuracy) << "\n";
  out << "gap_rms," << format_full(report.before.gap_rms) << ","
      << format_full(report.after.gap_rms) << "\n";
  out << "undefined_gap_count," << report.before.undefined_gap_count << ","
      << report.after.undefined_gap_count << "\n";
  out << "group_tpr_before";
  for (double v : report.before.group_tpr) out << "," << format_full(v);
  out << "\n";
  out << "group_tpr_after";
  for (double v : report.after.group_tpr) out << "," << format_full(v);
  out << "\n";
  out << "unweighted_base_rate," << format_full(report.unweighted_base_rate) << "\n";
  out << "unweighted_advanced_rate," << format_full(report.unweighted_advanced_rate) << "\n";
  out << "weighted_base_rate," << format_full(report.weighted_base_rate) << "\n";
  out << "weighted_advanced_rate," << format_full(report.weighted_advanced_rate) << "\n";
  out << "worsened_gap_fraction," << format_full(report.worsened_gap_fraction) << "\n";
  out << "worsened_gap_count," << report.worsened_gap_count << "\n";
  out << "judged_class_count," << report.judged_class_count << "\n";
  out << "excluded_class_count," << report.excluded_class_count << "\n";
  out << "\n";

  out << "class,population";
  for (const std::string& g : report.before.group_names) out << ",tpr_before_" << g;
  for (const std::string& g : report.before.group_names) out << ",tpr_after_" << g;
  for (const std::string& g : report.before.group_names) out << ",support_before_" << g;
  for (const std::string& g : report.before.group_names) out << ",support_after_" << g;
  for (const std::string& g : report.before.group_names) out << ",tpr_delta_" << g;
  out << ",gap_before,gap_after,gap_delta,defined,protected_group,protected_tie,"
         "gap_decreased,protected_no_harm,others_no_harm,base,advanced\n";
  for (int c = 0; c < C; ++c) {
    const SatisfactionVerdict& v = report.verdicts[static_cast<std::size_t>(c)];
    const ClassDelta& d = report.deltas[static_cast<std::size_t>(c)];
    out << csv::escape(report.before.class_names[static_cast<std::size_t>(c)]) << ","
        << report.class_populations[static_cast<std::size_t>(c)];
    for (int g = 0; g < G; ++g) out << "," << format_full(report.before.tpr_at(c, g));
    for (int g = 0; g < G; ++g) out << "," << format_full(report.after.tpr_at(c, g));
    for (int g = 0; g < G; ++g) out << "," << report.before.support_at(c, g);
    for (int g = 0; g < G; ++g) out << "," << report.after.support_at(c, g);
    for (int g = 0; g < G; ++g)
      out << "," << format_full(d.tpr_delta[static_cast<std::size_t>(g)]);
    out << "," << format_full(report.before.gap[static_cast<std::size_t>(c)]) << ","
        << format_full(report.after.gap[static_cast<std::size_t>(c)]) << ","
        << format_full(d.gap_delta) << "," << (v.defined ? 1 : 0) << "," << v.protected_group
        << "," << (v.protected_tie ? 1 : 0) << "," << (v.gap_decreased ? 1 : 0) << ","
        << (v.protected_no_harm ? 1 : 0) << "," << (v.others_no_harm ? 1 : 0) << ","
        << (v.base ? 1 : 0) << "," << (v.advanced ? 1 : 0) << "\n";
  }
}

ComparisonReport read_report_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open report file");
  const auto records = csv::read_records(in, path);

  ComparisonReport r;
  std::size_t i = 0;
  auto is_blank = [](const std::vector<std::string>& rec) {
    return rec.size() == 1 && rec[0].empty();
  };
  if (records.empty() || records[0].empty() || records[0][0] != "key")
    throw DataError(path + ": not a comparison CSV (missing key header)");
  ++i;
  bool saw_schema = false;
  for (; i < records.size() && !is_blank(records[i]); ++i) {
    const auto& rec = records[i];
    const std::string& key = rec[0];
    auto field = [&](std::size_t k) -> const std::string& {
      if (k >= rec.size()) throw DataError(path + ": truncated summary row " + key);
      return rec[k];
    };
    if (key == "schema") {
      if (field(1) != "gapfair.comparison/1") throw DataError(path + ": unknown schema");
      saw_schema = true;
    } else if (key == "epsilon_gap") {
      r.epsilon_gap = parse_double(field(1), path);
    } else if (key == "epsilon_harm") {
      r.epsilon_harm = parse_double(field(1), path);
    } else if (key == "group_names") {
      for (std::size_t k = 1; k < rec.size(); ++k) r.before.group_names.push_back(rec[k]);
      r.after.group_names = r.before.group_names;
    } else if (key == "accuracy") {
      r.before.accuracy = parse_double(field(1), path);
      r.after.accuracy = parse_double(field(2), path);
    } else if (key == "gap_rms") {
      r.before.gap_rms = parse_double(field(1), path);
      r.after.gap_rms = parse_double(field(2), path);
    } else if (key == "undefined_gap_count") {
      r.before.undefined_gap_count = static_cast<int>(parse_double(field(1), path));
      r.after.undefined_gap_count = static_cast<int>(parse_double(field(2), path));
    } else if (key == "group_tpr_before") {
      for (std::size_t k = 1; k < rec.size(); ++k)
        r.before.group_tpr.push_back(parse_double(rec[k], path));
    } else if (key == "group_tpr_after") {
      for (std::size_t k = 1; k < rec.size(); ++k)
        r.after.group_tpr.push_back(parse_double(rec[k], path));
    } else if (key == "unweighted_base_rate") {
      r.unweighted_base_rate = parse_double(field(1), path);
    } else if (key == "unweighted_advanced_rate") {
      r.unweighted_advanced_rate = parse_double(field(1), path);
    } else if (key == "weighted_base_rate") {
      r.weighted_base_rate = parse_double(field(1), path);
    } else if (key == "weighted_advanced_rate") {
      r.weighted_advanced_rate = parse_double(field(1), path);
    } else if (key == "worsened_gap_fraction") {
      r.worsened_gap_fraction = parse_double(field(1), path);
    } else if (key == "worsened_gap_count") {
      r.worsened_gap_count = static_cast<int>(parse_double(field(1), path));
    } else if (key == "judged_class_count") {
      r.judged_class_count = static_cast<int>(parse_double(field(1), path));
    } else if (key == "excluded_class_count") {
      r.excluded_class_count = static_cast<int>(parse_double(field(1), path));
    } else {
      throw DataError(path + ": unknown summary key \"" + key + "\"");
    }
  }
  if (!saw_schema) throw DataError(path + ": missing schema row");
  while (i < records.size() && is_blank(records[i])) ++i;
  if (i >= records.size()) throw DataError(path + ": missing per-class table");

  const int G = static_cast<int>(r.before.group_names.size());
  const std::size_t expected_cols = 2 + 5 * static_cast<std::size_t>(G) + 11;
  if (records[i].size() != expected_cols)
    throw DataError(path + ": per-class header has wrong column count");
  ++i;
  for (; i < records.size(); ++i) {
    if (is_blank(records[i])) continue;
    const auto& rec = records[i];
    if (rec.size() != expected_cols)
      throw DataError(path + ": per-class row has wrong column count");
    std::size_t k = 0;
    r.before.class_names.push_back(rec[k]);
    r.after.class_names.push_back(rec[k]);
    ++k;
    r.class_populations.push_back(static_cast<std::int64_t>(parse_double(rec[k++], path)));
    for (int g = 0; g < G; ++g) r.before.tpr.push_back(parse_double(rec[k++], path));
    for (int g = 0; g < G; ++g) r.after.tpr.push_back(parse_double(rec[k++], path));
    for (int g = 0; g < G; ++g)
      r.before.support.push_back(static_cast<std::int64_t>(parse_double(rec[k++], path)));
    for (int g = 0; g < G; ++g)
      r.after.support.push_back(static_cast<std::int64_t>(parse_double(rec[k++], path)));
    ClassDelta d;
    for (int g = 0; g < G; ++g) d.tpr_delta.push_back(parse_double(rec[k++], path));
    r.before.gap.push_back(parse_double(rec[k++], path));
    r.after.gap.push_back(parse_double(rec[k++], path));
    d.gap_delta = parse_double(rec[k++], path);
    r.deltas.push_back(std::move(d));
    SatisfactionVerdict v;
    v.defined = rec[k++] == "1";
    v.protected_group = static_cast<int>(parse_double(rec[k++], path));
    v.protected_tie = rec[k++] == "1";
    v.gap_decreased = rec[k++] == "1";
    v.protected_no_harm = rec[k++] == "1";
    v.others_no_harm = rec[k++] == "1";
    v.base = rec[k++] == "1";
    v.advanced = rec[k++] == "1";
    r.verdicts.push_back(v);
  }
  return r;
}

void write_report_markdown(const ComparisonReport& report,
                           const std::map<std::string, RunAggregate>* aggregates,
                           const std::string& method_name, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");

  out << "# Overall performance\n\n";
  out << "| Metric | Original | " << method_name << " |\n";
  out << "|---|---|---|\n";

  auto row = [&](const std::string& label, const std::string& key, double before, double after) {
    double orig = before, deb = after;
    bool significant = false;
    if (aggregates != nullptr) {
      auto it = aggregates->find(key);
      if (it != aggregates->end()) {
        orig = it->second.baseline_mean;
        deb = it->second.mean;
        significant = it->second.significant;
      }
    }
    const double delta = deb - orig;
    out << "| " << label << " | " << format_2dp(orig) << " | ";
    if (significant) {
      out << "<u>" << format_2dp(deb) << "</u>";
    } else {
      out << format_2dp(deb);
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%+.2f", delta);
    out << " (" << buf << ") |\n";
  };

  row("Accuracy", "accuracy", report.before.accuracy, report.after.accuracy);
  row("GAP^RMS", "gap_rms", report.before.gap_rms, report.after.gap_rms);
  for (std::size_t g = 0; g < report.before.group_names.size(); ++g) {
    const std::string& name = report.before.group_names[g];
    row("TPR " + name, "tpr:" + name, report.before.group_tpr[g], report.after.group_tpr[g]);
  }

  out << "\nBase satisfaction: " << format_2dp(100.0 * report.unweighted_base_rate)
      << "% unweighted, " << format_2dp(100.0 * report.weighted_base_rate) << "% weighted. "
      << "Advanced satisfaction: " << format_2dp(100.0 * report.unweighted_advanced_rate)
      << "% unweighted, " << format_2dp(100.0 * report.weighted_advanced_rate)
      << "% weighted.\n\n";
  out << "Worsened GAP: " << report.worsened_gap_count << "/" << report.judged_class_count
      << " classes (" << format_2dp(100.0 * report.worsened_gap_fraction) << "%).";
  if (report.excluded_class_count > 0) {
    out << " Excluded for zero support: " << report.excluded_class_count << ".";
  }
  out << "\n\n# Per-class results\n\n";

  // Classes sorted alphabetically, appendix-table style.
  std::vector<std::size_t> order(report.before.class_names.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.before.class_names[a] < report.before.class_names[b];
  });

  out << "| Class |";
  for (const std::string& g : report.before.group_names) out << " TPR " << g << " | | ";
  out << "GAP | | Verdict |\n";
  out << "|---|";
  for (std::size_t g = 0; g < report.before.group_names.size(); ++g) out << "---|---|";
  out << "---|---|---|\n";
  for (std::size_t c : order) {
    const SatisfactionVerdict& v = report.verdicts[c];
    out << "| " << report.before.class_names[c] << " |";
    for (int g = 0; g < report.before.group_count(); ++g) {
      out << " " << format_2dp(report.before.tpr_at(static_cast<int>(c), g)) << " | "
          << format_2dp(report.after.tpr_at(static_cast<int>(c), g)) << " |";
    }
    out << " " << format_2dp(std::abs(report.before.gap[c])) << " | "
        << format_2dp(std::abs(report.after.gap[c])) << " | ";
    if (!v.defined) {
      out << "excluded";
    } else if (v.advanced) {
      out << "advanced";
    } else if (v.base) {
      out << "base";
    } else {
      out << "-";
    }
    out << " |\n";
  }
}

void write_report_svg(const ComparisonReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");

  const int C = report.before.class_count();
  const int G = report.before.group_count();
  const int panels = G + 1;  // one TPR-delta panel per group plus the gap panel

  constexpr int kRowH = 16;
  constexpr int kLabelW = 170;
  constexpr int kPlotW = 360;
  constexpr int kPanelGap = 40;
  constexpr int kTop = 30;
  const int panel_h = C * kRowH;
  const int width = kLabelW + kPlotW + 60;
  const int height = kTop + panels * (panel_h + kPanelGap);

  double max_abs = 1.0;
  for (const ClassDelta& d : report.deltas) {
    for (double v : d.tpr_delta) {
      if (!std::isnan(v)) max_abs = std::max(max_abs, std::abs(v));
    }
    if (!std::isnan(d.gap_delta)) max_abs = std::max(max_abs, std::abs(d.gap_delta));
  }
  const double scale = (kPlotW / 2.0) / max_abs;
  const double x0 = kLabelW + kPlotW / 2.0;

  std::vector<std::size_t> order(static_cast<std::size_t>(C));
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.before.class_names[a] < report.before.class_names[b];
  });

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";

  auto panel = [&](int index, const std::string& title, const std::string& id_prefix,
                   auto delta_of, bool improvement_is_negative) {
    const int top = kTop + index * (panel_h + kPanelGap);
    out << "  <text x=\"" << kLabelW << "\" y=\"" << top - 8 << "\" font-weight=\"bold\">"
        << title << "</text>\n";
    out << "  <line x1=\"" << x0 << "\" y1=\"" << top << "\" x2=\"" << x0 << "\" y2=\""
        << top + panel_h << "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    for (std::size_t r = 0; r < order.size(); ++r) {
      const std::size_t c = order[r];
      const int y = top + static_cast<int>(r) * kRowH;
      const double delta = delta_of(c);
      out << "  <text x=\"" << kLabelW - 6 << "\" y=\"" << y + 12
          << "\" text-anchor=\"end\">" << report.before.class_names[c] << "</text>\n";
      if (std::isnan(delta)) continue;
      const bool improved = improvement_is_negative ? delta < 0 : delta > 0;
      const char* color = delta == 0 ? "#999999" : (improved ? "#1f77b4" : "#d62728");
      const double w = std::abs(delta) * scale;
      const double x = delta < 0 ? x0 - w : x0;
      char val[40];
      std::snprintf(val, sizeof(val), "%.2f", delta);
      out << "  <rect id=\"" << id_prefix << "-" << slugify(report.before.class_names[c])
          << "\" class=\"" << (improved ? "improved" : (delta == 0 ? "flat" : "worsened"))
          << "\" x=\"" << x << "\" y=\"" << y + 3 << "\" width=\"" << std::max(w, 0.5)
          << "\" height=\"" << kRowH - 6 << "\" fill=\"" << color << "\"><title>" << val
          << "</title></rect>\n";
    }
  };

  for (int g = 0; g < G; ++g) {
    panel(g, "TPR change: " + report.before.group_names[static_cast<std::size_t>(g)],
          "dtpr-" + slugify(report.before.group_names[static_cast<std::size_t>(g)]),
          [&](std::size_t c) { return report.deltas[c].tpr_delta[static_cast<std::size_t>(g)]; },
          /*improvement_is_negative=*/false);
  }
  panel(G, "GAP change", "dgap",
        [&](std::size_t c) { return report.deltas[c].gap_delta; },
        /*improvement_is_negative=*/true);

  out << "</svg>\n";
}

void emit_report(const ComparisonReport& report,
                 const std::map<std::string, RunAggregate>* aggregates,
                 const std::string& method_name, ReportFormat format, const std::string& path) {
  switch (format) {
    case ReportFormat::json: write_report_json(report, path); return;
    case ReportFormat::csv: write_report_csv(report, path); return;
    case ReportFormat::markdown: write_report_markdown(report, aggregates, method_name, path); return;
    case ReportFormat::svg_bars: write_report_svg(report, path); return;
  }
  throw DataError("emit_report: unknown format");
}

void write_aggregates_json(const std::map<std::string, RunAggregate>& aggregates,
                           const std::string& path) {
  nlohmann::json j;
  j["schema"] = "gapfair.aggregates/1";
  j["metrics"] = nlohmann::json::object();
  for (const auto& [name, agg] : aggregates) {
    j["metrics"][name] = {{"values", agg.values},
                          {"baseline_values", agg.baseline_values},
                          {"mean", agg.mean},
                          {"stddev", agg.stddev},
                          {"baseline_mean", agg.baseline_mean},
                          {"baseline_stddev", agg.baseline_stddev},
                          {"t", number_or_null(agg.t)},
                          {"df", number_or_null(agg.df)},
                          {"p", agg.p},
                          {"significant", agg.significant}};
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

std::map<std::string, RunAggregate> read_aggregates_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open aggregates file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed JSON: " + e.what());
  }
  if (j.value("schema", "") != "gapfair.aggregates/1")
    throw DataError(path + ": unknown aggregates schema");
  std::map<std::string, RunAggregate> out;
  for (const auto& [name, a] : j.at("metrics").items()) {
    RunAggregate agg;
    agg.metric = name;
    agg.values = a.at("values").get<std::vector<double>>();
    agg.baseline_values = a.at("baseline_values").get<std::vector<double>>();
    agg.mean = a.at("mean").get<double>();
    agg.stddev = a.at("stddev").get<double>();
    agg.baseline_mean = a.at("baseline_mean").get<double>();
    agg.baseline_stddev = a.at("baseline_stddev").get<double>();
    agg.t = json_number(a.at("t"));
    agg.df = json_number(a.at("df"));
    agg.p = a.at("p").get<double>();
    agg.significant = a.at("significant").get<bool>();
    out.emplace(name, std::move(agg));
  }
  return out;
}

void write_replay_json(const ReplayReport& replay, const std::string& path) {
  nlohmann::json j;
  j["schema"] = "gapfair.replay/1";
  j["rms_orig"] = replay.rms_orig;
  j["rms_deb"] = replay.rms_deb;
  j["base_count"] = replay.base_count;
  j["advanced_count"] = replay.advanced_count;
  j["judged_class_count"] = replay.comparison.judged_class_count;
  j["worsened_gap_count"] = replay.comparison.worsened_gap_count;
  j["worsened_gap_fraction"] = replay.comparison.worsened_gap_fraction;
  j["unweighted_base_rate"] = replay.comparison.unweighted_base_rate;
  j["unweighted_advanced_rate"] = replay.comparison.unweighted_advanced_rate;
  j["verdict_diff"] = nlohmann::json::array();
  for (const auto& d : replay.verdict_diff) {
    j["verdict_diff"].push_back({{"class", d.class_name},
                                 {"computed_base", d.computed_base},
                                 {"computed_advanced", d.computed_advanced},
                                 {"flag_base", d.flag_base},
                                 {"flag_advanced", d.flag_advanced}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

}  // namespace gapfair
