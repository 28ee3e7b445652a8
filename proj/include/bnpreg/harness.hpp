#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bnpreg/config.hpp"
#include "bnpreg/design.hpp"
#include "bnpreg/funcspace.hpp"
#include "bnpreg/inference.hpp"
#include "bnpreg/priors.hpp"

namespace bnpreg {

enum class PriorKind { kSpline, kBlockFourier, kBlockWavelet, kRandomSeries, kGp, kSparseAdditive };

std::string to_string(PriorKind kind);
PriorKind prior_kind_from_string(const std::string& name);

/// Prior family plus the per-n rules that size it.
struct PriorSettings {
  PriorKind kind = PriorKind::kSpline;
  // Spline: m = max(order, ceil(m_scale * n^m_exponent)).
  int order = 4;
  double m_exponent = 1.0 / 3.0;
  double m_scale = 1.0;
  // Block priors: -1 selects the default level for the largest n.
  int max_level = -1;
  double alpha_floor = 0.5;
  // Random series and sparse additive components.
  FiniteRandomSeriesPrior series;
  // Sparse additive.
  int p = 1;
  double mu_sd = 1.0;
  // GP.
  SEGPPrior gp;
};

struct TruthSettings {
  SmoothnessBall ball;
  std::uint64_t seed = 1;
  int truncation = 50;
  int active = 1;  // sparse additive: coordinates 1..active carry signal
};

struct ExperimentConfig {
  PriorSettings prior;
  TruthSettings truth;
  std::vector<int> n_grid;
  int replications = 1;
  McmcConfig mcmc;
  DesignKind design = DesignKind::kRandomUniform;
  /// Noise level of the simulated data; 0 gives noiseless data.
  double sigma = 1.0;
  /// Sigma assumed by the model when sigma = 0.
  double model_sigma = 1e-2;
  /// Posterior draws for closed-form families.
  int posterior_draws = 500;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Builds an experiment from key-value text and rejects unknown keys.
ExperimentConfig experiment_from_config(const KeyValueConfig& kv);

struct RateRow {
  int n = 0;
  int replication = 0;
  double err_mean = 0.0;
  double err_q50 = 0.0;
  double err_q90 = 0.0;

  bool operator==(const RateRow&) const = default;
};

struct RateTable {
  std::vector<RateRow> rows;
};

struct RateFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<int> n_values;
};

enum class ErrorStatistic { kMean, kQ50, kQ90 };

/// f0 for a one-dimensional experiment.
SeriesFunction experiment_truth(const ExperimentConfig& config);
/// f0 for a sparse additive experiment.
AdditiveFunction experiment_additive_truth(const ExperimentConfig& config);

/// Prior used at sample size n. Spline dimensions follow n; block levels
/// follow the largest n of the grid.
PriorSpec experiment_prior(const ExperimentConfig& config, int n);

/// Posterior errors ||f - f0||_2 of one (n, replication) cell.
std::vector<double> contraction_cell(const ExperimentConfig& config, int n, int replication);

RateTable run_contraction_study(const ExperimentConfig& config, int threads = 1);

/// OLS of log(mean over replications of the statistic) on log n.
RateFit fit_rate_slope(const RateTable& table, ErrorStatistic statistic = ErrorStatistic::kMean);

std::string rate_table_csv(const RateTable& table);
std::string rate_fit_json(const RateFit& fit);

}  // namespace bnpreg
