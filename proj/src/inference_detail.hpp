#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

#include "bnpreg/inference.hpp"

namespace bnpreg::detail {

/// Univariate slice sampler (stepping out, then shrinkage) on [lo, hi].
/// log_f(x0) must be finite.
double slice_sample(const std::function<double(double)>& log_f, double x0, double lo, double hi,
                    double width, Rng& rng);

/// log p(y) for y ~ N(0, sigma^2 I + v B B^T) from the Gram pieces
/// G = B^T B, c = B^T y and ||y||^2; fills the posterior mean of beta if asked.
double log_marginal_from_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& cross,
                              double yy, std::size_t n, double sigma, double prior_variance,
                              Eigen::VectorXd* posterior_mean = nullptr);

/// ESS of the ||f||_2 trace of the kept draws.
double norm_trace_ess(const std::vector<SeriesFunction>& draws);

inline double accept_rate(int accepted, int proposed) {
  return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
}

}  // namespace bnpreg::detail
