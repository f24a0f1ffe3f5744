#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace kdesplit {

double median(std::vector<double> values);
double mean(const std::vector<double>& values);
// Empirical quantile with linear interpolation, q in [0, 1].
double quantile(std::vector<double> values, double q);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;
  // two-sided confidence interval for the slope
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  std::size_t points = 0;
};

// Least squares y = intercept + slope x; needs three distinct x.
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y, double confidence = 0.95);
// Same on (log x, log y); all values must be positive.
LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double confidence = 0.95);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};
// One-sample Kolmogorov-Smirnov test against a continuous distribution function.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);
// Asymptotic tail probability with the finite-n correction of Stephens.
double ks_p_value(double statistic, std::size_t n);

}  // namespace kdesplit
