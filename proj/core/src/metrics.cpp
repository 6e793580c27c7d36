#include "gapfair/metrics.hpp"

#include <cmath>
#include <limits>

#include "gapfair/errors.hpp"

namespace gapfair {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

EvalResult evaluate(std::span<const int> predictions, std::span<const int> labels,
                    std::span<const int> groups, const std::vector<std::string>& class_names,
                    const std::vector<std::string>& group_names) {
  const std::size_t n = labels.size();
  if (n == 0) throw DataError("evaluate: empty input");
  if (predictions.size() != n || groups.size() != n)
    throw DataError("evaluate: predictions/labels/groups length mismatch");
  const int C = static_cast<int>(class_names.size());
  const int G = static_cast<int>(group_names.size());
  if (C < 1 || G < 1) throw DataError("evaluate: empty class or group catalog");

  EvalResult r;
  r.class_names = class_names;
  r.group_names = group_names;
  const std::size_t cells = static_cast<std::size_t>(C) * G;
  std::vector<std::int64_t> hits(cells, 0);
  r.support.assign(cells, 0);
  std::vector<std::int64_t> group_total(static_cast<std::size_t>(G), 0);
  std::vector<std::int64_t> group_hits(static_cast<std::size_t>(G), 0);

  std::int64_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    const int z = groups[i];
    if (y < 0 || y >= C) throw DataError("evaluate: label out of range at index " + std::to_string(i));
    if (z < 0 || z >= G) throw DataError("evaluate: group out of range at index " + std::to_string(i));
    const std::size_t cell = static_cast<std::size_t>(y) * G + z;
    r.support[cell] += 1;
    group_total[static_cast<std::size_t>(z)] += 1;
    if (predictions[i] == y) {
      hits[cell] += 1;
      group_hits[static_cast<std::size_t>(z)] += 1;
      ++correct;
    }
  }

  r.tpr.assign(cells, kNaN);
  for (std::size_t c = 0; c < cells; ++c) {
    if (r.support[c] > 0) {
      r.tpr[c] = 100.0 * static_cast<double>(hits[c]) / static_cast<double>(r.support[c]);
    }
  }
  r.group_tpr.assign(static_cast<std::size_t>(G), kNaN);
  for (int g = 0; g < G; ++g) {
    if (group_total[static_cast<std::size_t>(g)] > 0) {
      r.group_tpr[static_cast<std::size_t>(g)] =
          100.0 * static_cast<double>(group_hits[static_cast<std::size_t>(g)]) /
          static_cast<double>(group_total[static_cast<std::size_t>(g)]);
    }
  }
  r.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n);

  // Signed gap: group 0 minus group 1.
  r.gap.assign(static_cast<std::size_t>(C), kNaN);
  std::vector<double> defined;
  for (int c = 0; c < C; ++c) {
    const double a = r.tpr_at(c, 0);
    const double b = G > 1 ? r.tpr_at(c, 1) : 0.0;
    if (!std::isnan(a) && !std::isnan(b)) {
      r.gap[static_cast<std::size_t>(c)] = a - b;
      defined.push_back(a - b);
    } else {
      ++r.undefined_gap_count;
    }
  }
  r.gap_rms = defined.empty() ? kNaN : gap_rms(defined);
  return r;
}

double gap_rms(std::span<const double> gaps) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double g : gaps) {
    if (std::isnan(g)) continue;
    sum += g * g;
    ++count;
  }
  if (count == 0) throw DataError("gap_rms: no defined gap entries");
  return std::sqrt(sum / static_cast<double>(count));
}

std::vector<SatisfactionVerdict> judge_satisfaction(const EvalResult& before,
                                                    const EvalResult& after, double epsilon_gap,
                                                    double epsilon_harm) {
  if (before.class_names != after.class_names || before.group_names != after.group_names)
    throw DataError("judge_satisfaction: class/group catalogs differ between runs");
  const int C = before.class_count();
  const int G = before.group_count();

  std::vector<SatisfactionVerdict> verdicts(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    SatisfactionVerdict& v = verdicts[static_cast<std::size_t>(c)];
    bool all_defined = !std::isnan(before.gap[static_cast<std::size_t>(c)]) &&
                       !std::isnan(after.gap[static_cast<std::size_t>(c)]);
    for (int g = 0; g < G && all_defined; ++g) {
      all_defined = !std::isnan(before.tpr_at(c, g)) && !std::isnan(after.tpr_at(c, g));
    }
    if (!all_defined) {
      v.defined = false;
      continue;
    }

    // Protected group: lowest before-TPR; ties flagged, lower index wins.
    int prot = 0;
    for (int g = 1; g < G; ++g) {
      if (before.tpr_at(c, g) < before.tpr_at(c, prot)) prot = g;
    }
    for (int g = 0; g < G; ++g) {
      if (g != prot && before.tpr_at(c, g) == before.tpr_at(c, prot)) v.protected_tie = true;
    }
    v.protected_group = prot;

    v.gap_decreased = std::abs(after.gap[static_cast<std::size_t>(c)]) <
                      std::abs(before.gap[static_cast<std::size_t>(c)]) - epsilon_gap;
    v.protected_no_harm = after.tpr_at(c, prot) >= before.tpr_at(c, prot) - epsilon_harm;
    v.others_no_harm = true;
    for (int g = 0; g < G; ++g) {
      if (g == prot) continue;
      if (after.tpr_at(c, g) < before.tpr_at(c, g) - epsilon_harm) v.others_no_harm = false;
    }
    v.base = v.gap_decreased && v.protected_no_harm;
    v.advanced = v.base && v.others_no_harm;
  }
  return verdicts;
}

ComparisonReport compare(const EvalResult& before, const EvalResult& after,
                         std::span<const std::int64_t> class_populations, double epsilon_gap,
                         double epsilon_harm) {
  const int C = before.class_count();
  if (static_cast<int>(class_populations.size()) != C)
    throw DataError("compare: class_populations size != class count");

  ComparisonReport rep;
  rep.before = before;
  rep.after = after;
  rep.epsilon_gap = epsilon_gap;
  rep.epsilon_harm = epsilon_harm;
  rep.verdicts = judge_satisfaction(before, after, epsilon_gap, epsilon_harm);
  rep.class_populations.assign(class_populations.begin(), class_populations.end());

  const int G = before.group_count();
  rep.deltas.resize(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    ClassDelta& d = rep.deltas[static_cast<std::size_t>(c)];
    d.tpr_delta.resize(static_cast<std::size_t>(G), kNaN);
    for (int g = 0; g < G; ++g) {
      d.tpr_delta[static_cast<std::size_t>(g)] = after.tpr_at(c, g) - before.tpr_at(c, g);
    }
    d.gap_delta = std::abs(after.gap[static_cast<std::size_t>(c)]) -
                  std::abs(before.gap[static_cast<std::size_t>(c)]);
  }

  std::int64_t pop_total = 0, pop_base = 0, pop_adv = 0;
  int judged = 0, base_count = 0, adv_count = 0, worsened = 0;
  for (int c = 0; c < C; ++c) {
    const SatisfactionVerdict& v = rep.verdicts[static_cast<std::size_t>(c)];
    if (!v.defined) {
      ++rep.excluded_class_count;
      continue;
    }
    ++judged;
    pop_total += class_populations[static_cast<std::size_t>(c)];
    if (v.base) {
      ++base_count;
      pop_base += class_populations[static_cast<std::size_t>(c)];
    }
    if (v.advanced) {
      ++adv_count;
      pop_adv += class_populations[static_cast<std::size_t>(c)];
    }
    if (std::abs(after.gap[static_cast<std::size_t>(c)]) >
        std::abs(before.gap[static_cast<std::size_t>(c)])) {
      ++worsened;
    }
  }
  if (judged == 0) throw DataError("compare: no class has defined verdicts");
  if (pop_total == 0) throw DataError("compare: total class population is zero");

  rep.judged_class_count = judged;
  rep.worsened_gap_count = worsened;
  rep.unweighted_base_rate = static_cast<double>(base_count) / judged;
  rep.unweighted_advanced_rate = static_cast<double>(adv_count) / judged;
  rep.weighted_base_rate = static_cast<double>(pop_base) / static_cast<double>(pop_total);
  rep.weighted_advanced_rate = static_cast<double>(pop_adv) / static_cast<double>(pop_total);
  rep.worsened_gap_fraction = static_cast<double>(worsened) / judged;
  return rep;
}

}  // namespace gapfair
