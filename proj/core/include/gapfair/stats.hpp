#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gapfair {

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Welch's unequal-variance two-sample t-test with Welch-Satterthwaite degrees
// of freedom. Both samples zero-variance with equal means gives t=0, p=1.
TTestResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b);

// Regularized incomplete beta I_x(a, b), relative error <= 1e-8.
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t distribution.
double student_t_two_sided_p(double t, double df);

// One metric aggregated across seeded runs, with significance vs the baseline.
struct RunAggregate {
  std::string metric;
  std::vector<double> values;          // debiased, one per seed
  std::vector<double> baseline_values; // one per seed
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double baseline_mean = 0.0;
  double baseline_stddev = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool significant = false;  // p < 0.05
};

double mean_of(std::span<const double> values);
double sample_stddev(std::span<const double> values);

// One seeded run reduced to named scalar metrics.
using MetricMap = std::map<std::string, double>;
using RunFn = std::function<MetricMap(std::uint64_t seed)>;

// Executes baseline and debiased once per seed (k >= 2) and aggregates every
// metric the runs share, with a Welch test per metric.
std::map<std::string, RunAggregate> run_repeated(const RunFn& baseline, const RunFn& debiased,
                                                 std::span<const std::uint64_t> seeds);

}  // namespace gapfair
