#pragma once

#include <span>
#include <vector>

namespace bnpreg {

double mean(std::span<const double> values);
/// Unbiased (n - 1) sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> values);
/// Linear-interpolation quantile (R type 7).
double quantile(std::span<const double> values, double p);

/// Effective sample size by Geyer's initial positive sequence estimator.
double effective_sample_size(std::span<const double> trace);

/// Monte Carlo standard error of the mean from non-overlapping batch means.
double batch_means_standard_error(std::span<const double> trace,
                                  int batches = 25);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit least_squares_line(std::span<const double> x,
                             std::span<const double> y);

}  // namespace bnpreg
