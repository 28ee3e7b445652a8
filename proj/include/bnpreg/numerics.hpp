#pragma once

#include <functional>
#include <span>
#include <vector>

namespace bnpreg {

/// Midpoints of `panels` equal cells of [a, b].
std::vector<double> midpoint_nodes(int panels, double a = 0.0, double b = 1.0);

/// Composite midpoint rule on [a, b].
template <class F>
double integrate_midpoint(F&& f, int panels, double a = 0.0, double b = 1.0) {
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) sum += f(a + (i + 0.5) * h);
  return sum * h;
}

/// Adaptive Simpson quadrature with Richardson correction. `tol` is an
/// absolute tolerance on the whole interval.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol = 1e-13, int max_depth = 60);

double log_add_exp(double a, double b);
double log_sum_exp(std::span<const double> values);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace bnpreg
