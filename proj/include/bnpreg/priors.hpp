#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bnpreg/basis.hpp"
#include "bnpreg/funcspace.hpp"
#include "bnpreg/rng.hpp"

namespace bnpreg {

/// Fourier coefficient block l: indices k_l..k_{l+1}-1 with k_l = ceil(e^l).
struct BlockRange {
  int k_start = 0;
  int k_end = 0;
  int size = 0;

  bool operator==(const BlockRange&) const = default;
};

BlockRange block_partition(int level);

/// Density on [0, knots.back()] that is linear between knots and zero beyond.
/// Values are stored as logarithms so that levels whose floor value
/// underflows a double (exp(-e^l) for l >= 7) stay representable.
class PiecewiseLinearDensity {
 public:
  /// Knots strictly increasing from 0; repeated knots carrying the same value
  /// are merged.
  PiecewiseLinearDensity(std::vector<double> knots, std::vector<double> log_values);

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& log_values() const { return log_values_; }
  double support_max() const { return knots_.back(); }

  /// -infinity outside [0, support_max].
  double log_density(double t) const;
  double operator()(double t) const;

  double log_mass() const;
  /// log of the integral of the density over (t, infinity).
  double log_mass_above(double t) const;
  /// log of the integral of t * density(t).
  double log_first_moment() const;
  /// Minimum of log density over [a, b] within the support.
  double min_log_density(double a, double b) const;

  /// Same shape divided by its total mass.
  PiecewiseLinearDensity normalized() const;

  /// Exact draw by segment selection and trapezoid inverse CDF.
  double sample(Rng& rng) const;

 private:
  std::vector<double> knots_;
  std::vector<double> log_values_;
  std::vector<double> log_segment_mass_;
};

/// log T_j for the wavelet block density.
double wavelet_gj_log_peak(int j);
/// Unnormalized wavelet density: linear from T_j at 0 to 2^{-2^j} at 2^{-j^2},
/// flat at 2^{-2^j} up to 2^{-j}, zero beyond.
PiecewiseLinearDensity wavelet_gj_unnormalized(int j);
/// Closed-form mass of the unnormalized density: 1 + 2^{-2^j-j-1}.
double wavelet_gj_unnormalized_mass(int j);
/// Unnormalized density divided by its mass.
PiecewiseLinearDensity wavelet_gj(int j);
double wavelet_gj_density(int j, double t);

/// Fourier-block density: linear from T_l at 0 to exp(-e^l) at e^{-l^2},
/// flat at exp(-e^l) up to e^{-l}, zero beyond; T_l makes the mass 1.
PiecewiseLinearDensity fourier_gl(int level);

struct FiniteRandomSeriesPrior {
  double lambda = 1.0;
  double tau = 2.0;
  double tau0 = 0.5;
  FourierConvention convention = FourierConvention::kOrthonormal;

  void validate() const;
};

struct BlockPriorFourier {
  int max_level = 0;
  std::vector<PiecewiseLinearDensity> densities;  // g_0..g_L

  static BlockPriorFourier standard(int max_level);
  /// Number of Fourier coefficients covered: k_{L+1} - 1.
  int coefficient_count() const;
};

/// Haar block prior. The scaling coefficient carries a fixed N(0, 1) prior;
/// level j shares A_j ~ g_j across its 2^j coefficients.
struct BlockPriorWavelet {
  int max_resolution = 0;
  std::vector<PiecewiseLinearDensity> densities;  // g_0..g_J

  static BlockPriorWavelet standard(int max_resolution);
  int coefficient_count() const { return 2 << max_resolution; }
};

struct GaussianSplinePrior {
  int order = 4;
  int subintervals = 1;

  int dimension() const { return order + subintervals - 1; }
  BSplineBasis basis() const { return BSplineBasis(order, subintervals); }
};

/// Zero-mean GP with K(x, x') = exp(-(x - x')^2). Prior draws are returned
/// on a midpoint grid of grid_size points.
struct SEGPPrior {
  double jitter = 1e-10;
  int grid_size = 256;
};

struct SparseAdditivePrior {
  int p = 1;
  FiniteRandomSeriesPrior component;
  double mu_mean = 0.0;
  double mu_sd = 1.0;
};

using PriorSpec = std::variant<FiniteRandomSeriesPrior, BlockPriorFourier, BlockPriorWavelet,
                               GaussianSplinePrior, SEGPPrior, SparseAdditivePrior>;
using PriorDraw = std::variant<SeriesFunction, GridFunction, AdditiveFunction>;

std::string prior_name(const PriorSpec& prior);

/// Smallest L with k_{L+1} > 2 n^{1/(2a+1)}.
int default_block_level(int n_max, double alpha_floor = 0.5);
/// Smallest J with 2^{J+1} > 2 n^{1/(2a+1)}.
int default_wavelet_resolution(int n_max, double alpha_floor = 0.5);

PriorDraw sample_prior(const PriorSpec& prior, std::uint64_t seed);

SeriesFunction sample_prior(const FiniteRandomSeriesPrior& prior, Rng& rng);
/// Block draws also report the sampled variances A_l.
SeriesFunction sample_prior(const BlockPriorFourier& prior, Rng& rng,
                            std::vector<double>* variances = nullptr);
SeriesFunction sample_prior(const BlockPriorWavelet& prior, Rng& rng,
                            std::vector<double>* variances = nullptr);
SeriesFunction sample_prior(const GaussianSplinePrior& prior, Rng& rng);
GridFunction sample_prior(const SEGPPrior& prior, Rng& rng);
AdditiveFunction sample_prior(const SparseAdditivePrior& prior, Rng& rng);

int sample_zero_truncated_poisson(double lambda, Rng& rng);
/// Exponential power variate with density proportional to exp(-tau0 |x|^tau).
double sample_exponential_power(double tau, double tau0, Rng& rng);

/// log pi_N(m) for the zero-truncated Poisson; -infinity for m < 1.
double log_zero_truncated_poisson(int m, double lambda);
/// log sum_{N > m} pi_N(N).
double log_zero_truncated_poisson_tail(int m, double lambda);
/// Normalized log density of the exponential power law.
double log_exponential_power(double x, double tau, double tau0);
/// Variance of the exponential power law: tau0^{-2/tau} Gamma(3/tau) / Gamma(1/tau).
double exponential_power_variance(double tau, double tau0);

/// log pi_N(N) + sum log g(beta_k) with N = coefficients.size().
double log_prior_density(const FiniteRandomSeriesPrior& prior,
                         std::span<const double> coefficients);
/// Independent N(0, 1) coefficients; size must equal the prior dimension.
double log_prior_density(const GaussianSplinePrior& prior, std::span<const double> coefficients);
/// Conditional density given the block variances A_0..A_L.
double log_prior_density(const BlockPriorFourier& prior, std::span<const double> coefficients,
                         std::span<const double> variances);

/// Prepends beta_1 = -sum_{k>=2} beta_k * int psi_k so the series integrates
/// to zero. `raw` holds beta_2..beta_m.
std::vector<double> center_component(std::span<const double> raw,
                                     FourierConvention convention = FourierConvention::kOrthonormal);

struct BlockConditionReport {
  int level = 0;
  bool lower_bound = false;    // g >= exp(-c1 e^l) on [e^{-l^2}, e^{-l}]
  bool first_moment = false;   // int t g <= 4 exp(-c2 l^2)
  bool tail = false;           // int_{e^{-l^2}}^inf g <= exp(-c3 e^l)
  double log_min_density = 0.0;
  double log_first_moment = 0.0;
  double log_tail = 0.0;

  bool all() const { return lower_bound && first_moment && tail; }
};

BlockConditionReport verify_block_condition(int level, const PiecewiseLinearDensity& g, double c1,
                                            double c2, double c3);
std::vector<BlockConditionReport> verify_block_conditions(const BlockPriorFourier& prior, double c1,
                                                          double c2, double c3);

/// Tightest constants for which every level passes: c1 as small as possible,
/// c2 and c3 as large as possible. c2 ignores level 0 (its bound does not
/// involve c2) and c3 ignores levels with zero tail mass.
struct BlockConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};
BlockConstants fit_block_constants(const BlockPriorFourier& prior);

/// Smallest b0 with pi_N(m) >= exp(-b0 m log m) for 2 <= m <= max_m.
double fit_lower_mass_constant(const FiniteRandomSeriesPrior& prior, int max_m = 50);
/// Largest b1 with tail(m) <= exp(-b1 m log m) for m in [lo, hi].
double fit_tail_constant(const FiniteRandomSeriesPrior& prior, int lo = 5, int hi = 30);

/// Squared-exponential kernel matrix between two point sets.
Eigen::MatrixXd se_kernel(std::span<const double> a, std::span<const double> b);

}  // namespace bnpreg
