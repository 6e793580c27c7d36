#include "gapfair/stats.hpp"

#include <cmath>
#include <limits>

#include "gapfair/errors.hpp"

namespace gapfair {

double mean_of(std::span<const double> values) {
  if (values.empty()) throw DataError("mean_of: empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) throw DataError("sample_stddev: need at least 2 values");
  const double m = mean_of(values);
  double sq = 0.0;
  for (double v : values) sq += (v - m) * (v - m);
  return std::sqrt(sq / static_cast<double>(values.size() - 1));
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw DataError("incomplete_beta: a and b must be positive");
  if (x < 0.0 || x > 1.0) throw DataError("incomplete_beta: x must lie in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) throw DataError("student_t_two_sided_p: df must be positive");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(0.5 * df, 0.5, x);
}

TTestResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b) {
  if (sample_a.size() < 2 || sample_b.size() < 2)
    throw DataError("welch_t_test: each sample needs at least 2 values");
  const double na = static_cast<double>(sample_a.size());
  const double nb = static_cast<double>(sample_b.size());
  const double ma = mean_of(sample_a);
  const double mb = mean_of(sample_b);
  const double sa = sample_stddev(sample_a);
  const double sb = sample_stddev(sample_b);
  const double va = sa * sa / na;
  const double vb = sb * sb / nb;
  const double se = std::sqrt(va + vb);

  TTestResult r;
  if (se == 0.0) {
    // Both samples constant. Equal means: no evidence of a difference.
    r.t = ma == mb ? 0.0 : (ma > mb ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity());
    r.df = na + nb - 2.0;
    r.p = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.t = (ma - mb) / se;
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

std::map<std::string, RunAggregate> run_repeated(const RunFn& baseline, const RunFn& debiased,
                                                 std::span<const std::uint64_t> seeds) {
  if (seeds.size() < 2) throw DataError("run_repeated: need at least 2 seeds");

  std::vector<MetricMap> base_runs, deb_runs;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const std::string where = "run_repeated: run " + std::to_string(i) + " (seed " +
                              std::to_string(seeds[i]) + ") failed: ";
    try {
      base_runs.push_back(baseline(seeds[i]));
      deb_runs.push_back(debiased(seeds[i]));
    } catch (const NumericalError& e) {
      throw NumericalError(where + e.what());
    } catch (const std::exception& e) {
      throw DataError(where + e.what());
    }
  }

  std::map<std::string, RunAggregate> out;
  for (const auto& [metric, _] : deb_runs[0]) {
    if (!base_runs[0].contains(metric)) continue;
    RunAggregate agg;
    agg.metric = metric;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      agg.values.push_back(deb_runs[i].at(metric));
      agg.baseline_values.push_back(base_runs[i].at(metric));
    }
    agg.mean = mean_of(agg.values);
    agg.stddev = sample_stddev(agg.values);
    agg.baseline_mean = mean_of(agg.baseline_values);
    agg.baseline_stddev = sample_stddev(agg.baseline_values);
    const TTestResult tt = welch_t_test(agg.values, agg.baseline_values);
    agg.t = tt.t;
    agg.df = tt.df;
    agg.p = tt.p;
    agg.significant = tt.p < 0.05;
    out.emplace(metric, std::move(agg));
  }
  return out;
}

}  // namespace gapfair
