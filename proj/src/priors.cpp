#include "bnpreg/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bnpreg/errors.hpp"
#include "bnpreg/numerics.hpp"

namespace bnpreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2 = std::numbers::ln2;

// Largest level whose knots e^{-l^2} stay normal doubles.
constexpr int kMaxFourierLevel = 26;
constexpr int kMaxWaveletLevel = 24;

double log_trapezoid_mass(double width, double la, double lb) {
  return std::log(width) + log_add_exp(la, lb) - kLog2;
}

}  // namespace

BlockRange block_partition(int level) {
  if (level < 0) throw DomainError("block level must be >= 0");
  const int start = static_cast<int>(std::ceil(std::exp(static_cast<double>(level))));
  const int next = static_cast<int>(std::ceil(std::exp(static_cast<double>(level + 1))));
  return {start, next - 1, next - start};
}

PiecewiseLinearDensity::PiecewiseLinearDensity(std::vector<double> knots,
                                               std::vector<double> log_values) {
  if (knots.size() != log_values.size() || knots.size() < 2)
    throw DomainError("piecewise-linear density needs >= 2 knots with matching values");
  if (!(knots.front() >= 0.0)) throw DomainError("piecewise-linear density knots must be >= 0");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]) || std::isnan(log_values[i]) || log_values[i] == INFINITY)
      throw DomainError("piecewise-linear density: non-finite knot or value");
    if (i > 0 && knots[i] < knots[i - 1])
      throw DomainError("piecewise-linear density knots must be nondecreasing");
    if (i > 0 && knots[i] == knots[i - 1]) {
      if (log_values[i] != log_values[i - 1])
        throw DomainError("piecewise-linear density cannot jump at a repeated knot");
      continue;
    }
    knots_.push_back(knots[i]);
    log_values_.push_back(log_values[i]);
  }
  if (knots_.size() < 2) throw DomainError("piecewise-linear density has empty support");
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
    log_segment_mass_.push_back(
        log_trapezoid_mass(knots_[i + 1] - knots_[i], log_values_[i], log_values_[i + 1]));
}

double PiecewiseLinearDensity::log_density(double t) const {
  if (!(t >= knots_.front() && t <= knots_.back())) return kNegInf;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.end()) return log_values_.back();
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const double s = (t - knots_[i]) / (knots_[i + 1] - knots_[i]);
  if (s <= 0.0) return log_values_[i];
  return log_add_exp(std::log1p(-s) + log_values_[i], std::log(s) + log_values_[i + 1]);
}

double PiecewiseLinearDensity::operator()(double t) const { return std::exp(log_density(t)); }

double PiecewiseLinearDensity::log_mass() const { return log_sum_exp(log_segment_mass_); }

double PiecewiseLinearDensity::log_mass_above(double t) const {
  if (t <= knots_.front()) return log_mass();
  if (t >= knots_.back()) return kNegInf;
  std::vector<double> parts;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    if (knots_[i] >= t) {
      parts.push_back(log_segment_mass_[i]);
    } else if (knots_[i + 1] > t) {
      parts.push_back(
          log_trapezoid_mass(knots_[i + 1] - t, log_density(t), log_values_[i + 1]));
    }
  }
  return log_sum_exp(parts);
}

double PiecewiseLinearDensity::log_first_moment() const {
  // Over a segment [a, a + w]: w (a (va + vb) / 2 + w (va / 6 + vb / 3)).
  std::vector<double> parts;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    const double a = knots_[i];
    const double w = knots_[i + 1] - a;
    if (a > 0.0) parts.push_back(std::log(a) + log_segment_mass_[i]);
    parts.push_back(2.0 * std::log(w) + log_add_exp(log_values_[i] - std::log(6.0),
                                                     log_values_[i + 1] - std::log(3.0)));
  }
  return log_sum_exp(parts);
}

double PiecewiseLinearDensity::min_log_density(double a, double b) const {
  if (a > b) std::swap(a, b);
  if (a < knots_.front() || b > knots_.back()) return kNegInf;
  double lo = std::min(log_density(a), log_density(b));
  for (std::size_t i = 0; i < knots_.size(); ++i)
    if (knots_[i] > a && knots_[i] < b) lo = std::min(lo, log_values_[i]);
  return lo;
}

PiecewiseLinearDensity PiecewiseLinearDensity::normalized() const {
  const double z = log_mass();
  std::vector<double> values(log_values_);
  for (double& v : values) v -= z;
  return PiecewiseLinearDensity(knots_, std::move(values));
}

double PiecewiseLinearDensity::sample(Rng& rng) const {
  const double total = log_mass();
  double u = uniform01(rng);
  std::size_t seg = log_segment_mass_.size() - 1;
  for (std::size_t i = 0; i < log_segment_mass_.size(); ++i) {
    const double p = std::exp(log_segment_mass_[i] - total);
    if (u < p) {
      seg = i;
      break;
    }
    u -= p;
  }
  const double a = knots_[seg];
  const double w = knots_[seg + 1] - a;
  const double la = log_values_[seg];
  const double lb = log_values_[seg + 1];
  // Inverse CDF of the trapezoid (1 - s) + rho s on [0, 1] with rho <= 1,
  // oriented from the larger endpoint.
  const double rho = std::exp(-std::abs(la - lb));
  const double v = uniform01(rng);
  const double s = v * (1.0 + rho) / (1.0 + std::sqrt(1.0 - (1.0 - rho) * (1.0 + rho) * v));
  return la >= lb ? a + w * s : a + w * (1.0 - s);
}

double wavelet_gj_log_peak(int j) {
  if (j < 0 || j > kMaxWaveletLevel) throw DomainError("wavelet level out of range");
  // T_j = 2^{1+j^2} (1 - 2^{-2^j-j-1} + 2^{-2^j-j^2-1}).
  const double p = std::ldexp(1.0, j);
  const double jj = static_cast<double>(j) * j;
  return (1.0 + jj) * kLog2 +
         std::log1p(-std::exp2(-p - j - 1.0) + std::exp2(-p - jj - 1.0));
}

PiecewiseLinearDensity wavelet_gj_unnormalized(int j) {
  const double log_floor = -std::ldexp(1.0, j) * kLog2;
  const double jj = static_cast<double>(j) * j;
  return PiecewiseLinearDensity({0.0, std::exp2(-jj), std::exp2(-static_cast<double>(j))},
                                {wavelet_gj_log_peak(j), log_floor, log_floor});
}

double wavelet_gj_unnormalized_mass(int j) {
  if (j < 0 || j > kMaxWaveletLevel) throw DomainError("wavelet level out of range");
  return 1.0 + std::exp2(-std::ldexp(1.0, j) - j - 1.0);
}

PiecewiseLinearDensity wavelet_gj(int j) { return wavelet_gj_unnormalized(j).normalized(); }

double wavelet_gj_density(int j, double t) {
  if (t < 0.0) throw DomainError("wavelet block density needs t >= 0");
  return wavelet_gj(j)(t);
}

PiecewiseLinearDensity fourier_gl(int level) {
  if (level < 0 || level > kMaxFourierLevel) throw DomainError("Fourier block level out of range");
  const double l = level;
  const double log_floor = -std::exp(l);
  const double a = std::exp(-l * l);
  const double b = std::exp(-l);
  // Linear part (T + v) a / 2 carries whatever the flat part v (b - a) leaves.
  const double v = std::exp(log_floor);
  const double flat = v * (b - a);
  const double log_peak = l * l + std::log(2.0 * (1.0 - flat) - v * a);
  return PiecewiseLinearDensity({0.0, a, b}, {log_peak, log_floor, log_floor});
}

void FiniteRandomSeriesPrior::validate() const {
  if (!(lambda > 0.0) || !(tau > 0.0) || !(tau0 > 0.0))
    throw ConfigError("random series prior needs positive lambda, tau and tau0");
}

BlockPriorFourier BlockPriorFourier::standard(int max_level) {
  if (max_level < 0) throw DomainError("block prior max level must be >= 0");
  BlockPriorFourier prior{max_level, {}};
  for (int l = 0; l <= max_level; ++l) prior.densities.push_back(fourier_gl(l));
  return prior;
}

int BlockPriorFourier::coefficient_count() const { return block_partition(max_level).k_end; }

BlockPriorWavelet BlockPriorWavelet::standard(int max_resolution) {
  if (max_resolution < 0 || max_resolution > kMaxWaveletLevel)
    throw DomainError("wavelet prior resolution out of range");
  BlockPriorWavelet prior{max_resolution, {}};
  for (int j = 0; j <= max_resolution; ++j) prior.densities.push_back(wavelet_gj(j));
  return prior;
}

std::string prior_name(const PriorSpec& prior) {
  static constexpr const char* kNames[] = {"random_series", "block_fourier", "block_wavelet",
                                           "spline", "gp", "sparse_additive"};
  return kNames[prior.index()];
}

int default_block_level(int n_max, double alpha_floor) {
  if (n_max < 1) throw DomainError("sample size must be >= 1");
  const double target = 2.0 * std::pow(n_max, 1.0 / (2.0 * alpha_floor + 1.0));
  int level = 0;
  while (block_partition(level + 1).k_start <= target) ++level;
  return level;
}

int default_wavelet_resolution(int n_max, double alpha_floor) {
  if (n_max < 1) throw DomainError("sample size must be >= 1");
  const double target = 2.0 * std::pow(n_max, 1.0 / (2.0 * alpha_floor + 1.0));
  int j = 0;
  while (std::ldexp(1.0, j + 1) <= target) ++j;
  return std::min(j, kMaxWaveletLevel);
}

int sample_zero_truncated_poisson(double lambda, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (int m = 1; m < 100000; ++m) {
    cumulative += std::exp(log_zero_truncated_poisson(m, lambda));
    if (u < cumulative) return m;
  }
  throw NumericalError("zero-truncated Poisson inversion did not terminate");
}

double sample_exponential_power(double tau, double tau0, Rng& rng) {
  // |x|^tau ~ Gamma(1/tau, rate tau0).
  std::gamma_distribution<double> gamma(1.0 / tau, 1.0 / tau0);
  const double magnitude = std::pow(gamma(rng), 1.0 / tau);
  return uniform01(rng) < 0.5 ? -magnitude : magnitude;
}

SeriesFunction sample_prior(const FiniteRandomSeriesPrior& prior, Rng& rng) {
  prior.validate();
  const int n = sample_zero_truncated_poisson(prior.lambda, rng);
  std::vector<double> beta(static_cast<std::size_t>(n));
  for (double& b : beta) b = sample_exponential_power(prior.tau, prior.tau0, rng);
  return SeriesFunction(FourierBasis(prior.convention), std::move(beta));
}

SeriesFunction sample_prior(const BlockPriorFourier& prior, Rng& rng,
                            std::vector<double>* variances) {
  std::vector<double> beta(static_cast<std::size_t>(prior.coefficient_count()), 0.0);
  if (variances) variances->clear();
  for (int l = 0; l <= prior.max_level; ++l) {
    const double a = prior.densities[static_cast<std::size_t>(l)].sample(rng);
    if (variances) variances->push_back(a);
    const BlockRange block = block_partition(l);
    const double sd = std::sqrt(a);
    for (int k = block.k_start; k <= block.k_end; ++k)
      beta[static_cast<std::size_t>(k - 1)] = sd * standard_normal(rng);
  }
  return SeriesFunction(FourierBasis{}, std::move(beta));
}

SeriesFunction sample_prior(const BlockPriorWavelet& prior, Rng& rng,
                            std::vector<double>* variances) {
  std::vector<double> beta(static_cast<std::size_t>(prior.coefficient_count()), 0.0);
  if (variances) variances->clear();
  beta[0] = standard_normal(rng);
  for (int j = 0; j <= prior.max_resolution; ++j) {
    const double a = prior.densities[static_cast<std::size_t>(j)].sample(rng);
    if (variances) variances->push_back(a);
    const double sd = std::sqrt(a);
    for (std::size_t k = std::size_t{1} << j; k < (std::size_t{2} << j); ++k)
      beta[k] = sd * standard_normal(rng);
  }
  return SeriesFunction(HaarWaveletBasis(prior.max_resolution), std::move(beta));
}

SeriesFunction sample_prior(const GaussianSplinePrior& prior, Rng& rng) {
  std::vector<double> beta(static_cast<std::size_t>(prior.dimension()));
  for (double& b : beta) b = standard_normal(rng);
  return SeriesFunction(prior.basis(), std::move(beta));
}

GridFunction sample_prior(const SEGPPrior& prior, Rng& rng) {
  if (prior.grid_size < 1) throw DomainError("GP grid needs at least one point");
  GridFunction draw{midpoint_nodes(prior.grid_size), {}};
  // The SE kernel is numerically rank deficient on dense grids; the
  // eigendecomposition with clamped eigenvalues avoids jitter artifacts.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(se_kernel(draw.grid, draw.grid));
  Eigen::VectorXd z(prior.grid_size);
  for (int i = 0; i < prior.grid_size; ++i) z[i] = standard_normal(rng);
  const Eigen::VectorXd scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::VectorXd f = eig.eigenvectors() * scale.cwiseProduct(z);
  draw.values.assign(f.data(), f.data() + f.size());
  return draw;
}

AdditiveFunction sample_prior(const SparseAdditivePrior& prior, Rng& rng) {
  if (prior.p < 1) throw DomainError("sparse additive prior needs p >= 1");
  prior.component.validate();
  AdditiveFunction f;
  f.mu = prior.mu_mean + prior.mu_sd * standard_normal(rng);
  const int n = sample_zero_truncated_poisson(prior.component.lambda, rng);
  std::bernoulli_distribution include(1.0 / prior.p);
  for (int j = 0; j < prior.p; ++j) {
    f.active.push_back(include(rng) ? 1 : 0);
    std::vector<double> raw(static_cast<std::size_t>(n - 1));
    for (double& b : raw)
      b = sample_exponential_power(prior.component.tau, prior.component.tau0, rng);
    f.components.emplace_back(FourierBasis(prior.component.convention),
                              center_component(raw, prior.component.convention));
  }
  return f;
}

PriorDraw sample_prior(const PriorSpec& prior, std::uint64_t seed) {
  Rng rng(seed);
  return std::visit([&](const auto& p) -> PriorDraw { return sample_prior(p, rng); }, prior);
}

double log_zero_truncated_poisson(int m, double lambda) {
  if (m < 1) return kNegInf;
  // log(e^lambda - 1) = lambda + log1p(-e^{-lambda}).
  return m * std::log(lambda) - std::lgamma(m + 1.0) - lambda - std::log1p(-std::exp(-lambda));
}

double log_zero_truncated_poisson_tail(int m, double lambda) {
  if (m < 1) return 0.0;
  std::vector<double> terms;
  for (int k = m + 1;; ++k) {
    terms.push_back(log_zero_truncated_poisson(k, lambda));
    // Terms decay faster than geometrically once k > 2 lambda.
    if (k > 2.0 * lambda + 10 && terms.back() < terms.front() - 60.0) break;
  }
  return log_sum_exp(terms);
}

double log_exponential_power(double x, double tau, double tau0) {
  const double log_norm = kLog2 - std::log(tau0) / tau + std::lgamma(1.0 + 1.0 / tau);
  return -tau0 * std::pow(std::abs(x), tau) - log_norm;
}

double exponential_power_variance(double tau, double tau0) {
  return std::pow(tau0, -2.0 / tau) * std::exp(std::lgamma(3.0 / tau) - std::lgamma(1.0 / tau));
}

double log_prior_density(const FiniteRandomSeriesPrior& prior,
                         std::span<const double> coefficients) {
  prior.validate();
  if (coefficients.empty()) throw DomainError("random series state needs N >= 1 coefficients");
  double lp = log_zero_truncated_poisson(static_cast<int>(coefficients.size()), prior.lambda);
  for (double b : coefficients) lp += log_exponential_power(b, prior.tau, prior.tau0);
  return lp;
}

double log_prior_density(const GaussianSplinePrior& prior, std::span<const double> coefficients) {
  if (static_cast<int>(coefficients.size()) != prior.dimension()) {
    std::ostringstream msg;
    msg << "spline prior has dimension " << prior.dimension() << ", got "
        << coefficients.size() << " coefficients";
    throw DomainError(msg.str());
  }
  double lp = 0.0;
  for (double b : coefficients) lp += -0.5 * b * b - 0.5 * std::log(2.0 * std::numbers::pi);
  return lp;
}

double log_prior_density(const BlockPriorFourier& prior, std::span<const double> coefficients,
                         std::span<const double> variances) {
  if (static_cast<int>(coefficients.size()) != prior.coefficient_count() ||
      static_cast<int>(variances.size()) != prior.max_level + 1)
    throw DomainError("block prior state has the wrong shape");
  double lp = 0.0;
  for (int l = 0; l <= prior.max_level; ++l) {
    const double a = variances[static_cast<std::size_t>(l)];
    const BlockRange block = block_partition(l);
    for (int k = block.k_start; k <= block.k_end; ++k) {
      const double b = coefficients[static_cast<std::size_t>(k - 1)];
      lp += -0.5 * b * b / a - 0.5 * std::log(2.0 * std::numbers::pi * a);
    }
  }
  return lp;
}

std::vector<double> center_component(std::span<const double> raw, FourierConvention convention) {
  std::vector<double> out(raw.size() + 1, 0.0);
  double first = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i + 1] = raw[i];
    if (raw[i] != 0.0) first -= raw[i] * fourier_integral(static_cast<int>(i) + 2, convention);
  }
  out[0] = first;
  return out;
}

namespace {

bool log_leq(double lhs, double rhs) {
  return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
}

}  // namespace

BlockConditionReport verify_block_condition(int level, const PiecewiseLinearDensity& g, double c1,
                                            double c2, double c3) {
  const double l = level;
  BlockConditionReport report;
  report.level = level;
  report.log_min_density = g.min_log_density(std::exp(-l * l), std::exp(-l));
  report.log_first_moment = g.log_first_moment();
  report.log_tail = g.log_mass_above(std::exp(-l * l));
  report.lower_bound = log_leq(-c1 * std::exp(l), report.log_min_density);
  report.first_moment = log_leq(report.log_first_moment, std::log(4.0) - c2 * l * l);
  report.tail = log_leq(report.log_tail, -c3 * std::exp(l));
  return report;
}

std::vector<BlockConditionReport> verify_block_conditions(const BlockPriorFourier& prior, double c1,
                                                          double c2, double c3) {
  std::vector<BlockConditionReport> reports;
  for (int l = 0; l <= prior.max_level; ++l)
    reports.push_back(
        verify_block_condition(l, prior.densities[static_cast<std::size_t>(l)], c1, c2, c3));
  return reports;
}

BlockConstants fit_block_constants(const BlockPriorFourier& prior) {
  BlockConstants c{0.0, std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()};
  for (const auto& r : verify_block_conditions(prior, 1.0, 1.0, 1.0)) {
    const double l = r.level;
    c.c1 = std::max(c.c1, -r.log_min_density / std::exp(l));
    if (r.level >= 1) c.c2 = std::min(c.c2, (std::log(4.0) - r.log_first_moment) / (l * l));
    if (std::isfinite(r.log_tail)) c.c3 = std::min(c.c3, -r.log_tail / std::exp(l));
  }
  return c;
}

double fit_lower_mass_constant(const FiniteRandomSeriesPrior& prior, int max_m) {
  double b0 = 0.0;
  for (int m = 2; m <= max_m; ++m)
    b0 = std::max(b0, -log_zero_truncated_poisson(m, prior.lambda) / (m * std::log(m)));
  return b0;
}

double fit_tail_constant(const FiniteRandomSeriesPrior& prior, int lo, int hi) {
  double b1 = std::numeric_limits<double>::infinity();
  for (int m = std::max(lo, 2); m <= hi; ++m)
    b1 = std::min(b1, -log_zero_truncated_poisson_tail(m, prior.lambda) / (m * std::log(m)));
  return b1;
}

Eigen::MatrixXd se_kernel(std::span<const double> a, std::span<const double> b) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d = a[i] - b[j];
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(-d * d);
    }
  return k;
}

}  // namespace bnpreg
