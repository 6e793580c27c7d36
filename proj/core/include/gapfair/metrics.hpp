#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gapfair {

// Per-class, per-group true-positive-rate table for one (model, split) pair.
// TPRs are percentages. A (class, group) cell with no examples carries NaN
// and is excluded from gap_rms; the exclusion count is surfaced.
struct EvalResult {
  std::vector<std::string> class_names;
  std::vector<std::string> group_names;
  std::vector<double> tpr;            // [class * G + group], percent or NaN
  std::vector<std::int64_t> support;  // [class * G + group]
  std::vector<double> group_tpr;      // per group: percent of that group's rows correct
  std::vector<double> gap;            // per class: tpr(group 0) - tpr(group 1), NaN if undefined
  double accuracy = 0.0;              // percent
  double gap_rms = 0.0;               // over defined gaps
  int undefined_gap_count = 0;

  int class_count() const { return static_cast<int>(class_names.size()); }
  int group_count() const { return static_cast<int>(group_names.size()); }
  double tpr_at(int cls, int grp) const { return tpr[static_cast<std::size_t>(cls) * group_names.size() + grp]; }
  std::int64_t support_at(int cls, int grp) const { return support[static_cast<std::size_t>(cls) * group_names.size() + grp]; }
};

// TPR_{z,p} = 100 * |{i: g_i=z, y_i=p, yhat_i=p}| / |{i: g_i=z, y_i=p}|.
EvalResult evaluate(std::span<const int> predictions, std::span<const int> labels,
                    std::span<const int> groups, const std::vector<std::string>& class_names,
                    const std::vector<std::string>& group_names);

// sqrt(mean of squared gaps) over defined entries; throws when all undefined.
double gap_rms(std::span<const double> gaps);

// Per-class fairness verdict for a before/after pair.
struct SatisfactionVerdict {
  bool defined = true;        // false when a cell had zero support in either run
  int protected_group = 0;    // group with the lower before-TPR
  bool protected_tie = false; // before-TPRs equal; lower group index chosen
  bool gap_decreased = false;
  bool protected_no_harm = false;
  bool others_no_harm = false;
  bool base = false;      // gap_decreased && protected_no_harm
  bool advanced = false;  // base && others_no_harm
};

// Strict by default: gap must decrease by more than epsilon_gap (0 = any
// strict decrease); a group is unharmed when its TPR dropped by at most
// epsilon_harm.
std::vector<SatisfactionVerdict> judge_satisfaction(const EvalResult& before,
                                                    const EvalResult& after,
                                                    double epsilon_gap = 0.0,
                                                    double epsilon_harm = 0.0);

struct ClassDelta {
  std::vector<double> tpr_delta;  // per group
  double gap_delta = 0.0;         // |gap after| - |gap before|
};

struct ComparisonReport {
  EvalResult before;
  EvalResult after;
  std::vector<SatisfactionVerdict> verdicts;
  std::vector<ClassDelta> deltas;                // per class
  std::vector<std::int64_t> class_populations;   // weights for the weighted rates
  double unweighted_base_rate = 0.0;
  double unweighted_advanced_rate = 0.0;
  double weighted_base_rate = 0.0;
  double weighted_advanced_rate = 0.0;
  double worsened_gap_fraction = 0.0;
  int worsened_gap_count = 0;
  int judged_class_count = 0;   // classes with defined verdicts
  int excluded_class_count = 0; // zero-support exclusions, surfaced in reports
  double epsilon_gap = 0.0;
  double epsilon_harm = 0.0;
};

// Satisfaction rates (unweighted and population-weighted) plus the fraction
// of classes whose unsigned gap grew.
ComparisonReport compare(const EvalResult& before, const EvalResult& after,
                         std::span<const std::int64_t> class_populations,
                         double epsilon_gap = 0.0, double epsilon_harm = 0.0);

}  // namespace gapfair
