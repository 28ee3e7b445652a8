#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bnpreg/design.hpp"
#include "bnpreg/funcspace.hpp"
#include "bnpreg/priors.hpp"
#include "bnpreg/rng.hpp"

namespace bnpreg {

/// y_i = f(x_i) + e_i with e_i ~ N(0, sigma^2) and sigma known.
struct RegressionData {
  Design design;
  std::vector<double> responses;
  double sigma;

  RegressionData(Design design, std::vector<double> responses, double sigma);
  std::size_t size() const { return responses.size(); }
};

/// Responses f(x_i) + sigma * z_i; sigma may be 0 for noiseless data.
std::vector<double> simulate_responses(std::span<const double> clean, double sigma, Rng& rng);

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd precision_factor;  // lower Cholesky factor of the precision

  /// mean + L^{-T} z.
  Eigen::VectorXd sample(Rng& rng) const;
};

/// beta ~ N(0, I), y | beta ~ N(B beta, sigma^2 I). B may have zero rows.
GaussianPosterior conjugate_gaussian_update(const Eigen::MatrixXd& b, std::span<const double> y,
                                            double sigma);
GaussianPosterior fit_spline_conjugate(const RegressionData& data,
                                       const GaussianSplinePrior& prior);

struct GpPosterior {
  std::vector<double> grid;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  std::vector<double> variance() const;
  /// Draw on the grid via the clamped eigendecomposition of the covariance.
  std::vector<double> sample(Rng& rng) const;
};

/// Standard GP conditional; `points` may be empty. Jitter escalates by
/// factors of 10 from prior.jitter up to 1e-6.
GpPosterior gp_posterior(std::span<const double> points, std::span<const double> y, double sigma,
                         std::span<const double> query, const SEGPPrior& prior);
GpPosterior fit_gp(const RegressionData& data, const SEGPPrior& prior,
                   std::span<const double> query);

struct McmcConfig {
  int iterations = 5000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  double proposal_scale = 1.0;
  double birth = 1.0 / 3.0;
  double death = 1.0 / 3.0;
  double within = 1.0 / 3.0;
  /// false drops the likelihood so the chain targets the prior.
  bool likelihood = true;

  void validate() const;
  bool keep(int iteration) const {
    return iteration >= burn_in && (iteration - burn_in) % thin == 0;
  }
};

struct SamplerDiagnostics {
  std::map<std::string, double> acceptance;  // accepted / proposed per move type
  double ess = 0.0;                          // ESS of the ||f||_2 trace over kept draws
  std::uint64_t seed = 0;
  std::size_t kept = 0;
  /// Expected squared L2 norm the prior places beyond the sampler truncation.
  double truncation_mass = 0.0;
};

/// Kept draws plus per-draw hyperparameters (block variances, N, or z).
template <class F>
struct Draws {
  std::vector<F> draws;
  std::vector<std::vector<double>> hyper;
  SamplerDiagnostics diagnostics;
};

using PosteriorDraws = Draws<SeriesFunction>;
using AdditiveDraws = Draws<AdditiveFunction>;

PosteriorDraws fit_block_gibbs(const RegressionData& data, const BlockPriorFourier& prior,
                               const McmcConfig& config);
PosteriorDraws fit_block_gibbs(const RegressionData& data, const BlockPriorWavelet& prior,
                               const McmcConfig& config);

PosteriorDraws fit_random_series_rjmcmc(const RegressionData& data,
                                        const FiniteRandomSeriesPrior& prior,
                                        const McmcConfig& config);

/// Random-walk Metropolis on the spline coefficients, a cross-check of the
/// conjugate solve.
PosteriorDraws fit_spline_metropolis(const RegressionData& data, const GaussianSplinePrior& prior,
                                     const McmcConfig& config);

struct SparseAdditiveOptions {
  /// Coordinates held at z_j = 0 for the whole run.
  std::vector<std::uint8_t> forced_inactive;
};

AdditiveDraws fit_sparse_additive(const RegressionData& data, const SparseAdditivePrior& prior,
                                  const McmcConfig& config, const SparseAdditiveOptions& options = {});

/// log p(y | N = m) with beta ~ N(0, prior_variance I_m) over the first m
/// Fourier functions; `b` holds at least m columns.
double gaussian_log_marginal(const Eigen::MatrixXd& b, std::span<const double> y, double sigma,
                             double prior_variance, int m);

/// One JSON object per draw.
std::string draws_to_jsonl(const PosteriorDraws& draws);

}  // namespace bnpreg
