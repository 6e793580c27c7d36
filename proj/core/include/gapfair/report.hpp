#pragma once

#include <map>
#include <string>
#include <vector>

#include "gapfair/metrics.hpp"
#include "gapfair/stats.hpp"

namespace gapfair {

// One transcribed per-class results table: original/debiased TPR per group,
// original/debiased unsigned gap, and the published satisfaction flags.
struct PaperRow {
  std::string class_name;
  double tpr_m_orig = 0, tpr_m_deb = 0;
  double tpr_f_orig = 0, tpr_f_deb = 0;
  double gap_orig = 0, gap_deb = 0;
  bool base_flag = false;
  bool advanced_flag = false;
};

struct PaperTable {
  std::string method;
  std::vector<PaperRow> rows;
};

// Fixture CSV with header
// class,tpr_m_orig,tpr_m_deb,tpr_f_orig,tpr_f_deb,gap_orig,gap_deb,base,advanced
PaperTable load_paper_table(const std::string& path);

struct ReplayReport {
  ComparisonReport comparison;
  double rms_orig = 0;  // RMS of the table's original gap column
  double rms_deb = 0;   // RMS of the debiased gap column
  int base_count = 0;       // computed
  int advanced_count = 0;   // computed
  struct Disagreement {
    std::string class_name;
    bool computed_base = false, computed_advanced = false;
    bool flag_base = false, flag_advanced = false;
  };
  std::vector<Disagreement> verdict_diff;  // computed verdict vs published flag
};

// Feeds the table's TPRs and published gap columns through the satisfaction
// judge (no training involved) and diffs the verdicts against the flags.
ReplayReport replay_paper_table(const PaperTable& table, double epsilon_gap = 0.0,
                                double epsilon_harm = 0.0);

enum class ReportFormat { json, csv, markdown, svg_bars };

// Lossless serializations.
void write_report_json(const ComparisonReport& report, const std::string& path);
ComparisonReport read_report_json(const std::string& path);
void write_report_csv(const ComparisonReport& report, const std::string& path);
ComparisonReport read_report_csv(const std::string& path);

// Overall-metrics table: metric rows, Original/method columns, two-decimal
// deltas, <u>...</u> around statistically significant values.
void write_report_markdown(const ComparisonReport& report,
                           const std::map<std::string, RunAggregate>* aggregates,
                           const std::string& method_name, const std::string& path);

// Per-class horizontal delta bars (TPR per group, unsigned gap), improvements
// in blue, regressions in red. No plotting dependency; plain SVG.
void write_report_svg(const ComparisonReport& report, const std::string& path);

// Dispatch on format; markdown uses method_name/aggregates when given.
void emit_report(const ComparisonReport& report,
                 const std::map<std::string, RunAggregate>* aggregates,
                 const std::string& method_name, ReportFormat format, const std::string& path);

void write_aggregates_json(const std::map<std::string, RunAggregate>& aggregates,
                           const std::string& path);
std::map<std::string, RunAggregate> read_aggregates_json(const std::string& path);

void write_replay_json(const ReplayReport& replay, const std::string& path);

}  // namespace gapfair
