#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bnpreg/basis.hpp"
#include "bnpreg/design.hpp"

namespace bnpreg {

/// f(x) = sum_i coefficients[i] * psi_i(x) over a finite prefix of a basis.
class SeriesFunction {
 public:
  SeriesFunction(Basis basis, std::vector<double> coefficients);

  static SeriesFunction zero(Basis basis, std::size_t size);

  const Basis& basis() const { return basis_; }
  std::span<const double> coefficients() const { return coefficients_; }
  std::size_t size() const { return coefficients_.size(); }

  double operator()(double x) const;
  std::vector<double> evaluate(std::span<const double> xs) const;
  /// Integral over [0, 1].
  double integral() const;

  SeriesFunction scaled(double factor) const;

  bool operator==(const SeriesFunction&) const = default;

 private:
  Basis basis_;
  std::vector<double> coefficients_;
};

/// Function values on a fixed grid of midpoints (used for GP draws).
struct GridFunction {
  std::vector<double> grid;
  std::vector<double> values;
};

/// f(x) = mu + sum_j z_j f_j(x_j) on [0, 1]^p.
struct AdditiveFunction {
  double mu = 0.0;
  std::vector<SeriesFunction> components;
  std::vector<std::uint8_t> active;

  std::size_t dimension() const { return components.size(); }
  int active_count() const;
  double operator()(std::span<const double> x) const;
};

/// True when Parseval applies between expansions in the two bases.
bool parseval_compatible(const Basis& a, const Basis& b);

/// Integrated L2 distance; Parseval for compatible orthonormal bases,
/// composite midpoint quadrature otherwise.
double l2_distance(const SeriesFunction& f, const SeriesFunction& g,
                   int panels = kDefaultQuadraturePanels);
double l2_norm(const SeriesFunction& f, int panels = kDefaultQuadraturePanels);

/// max |f| over grid_size equispaced points including both endpoints. This is
/// a lower bound on the true sup-norm.
double sup_norm(const SeriesFunction& f, int grid_size = kDefaultQuadraturePanels);
double sup_distance(const SeriesFunction& f, const SeriesFunction& g,
                    int grid_size = kDefaultQuadraturePanels);

/// sqrt(n^{-1} sum_i (f(x_i) - g(x_i))^2) over a one-dimensional design.
double empirical_l2(const SeriesFunction& f, const SeriesFunction& g, const Design& design);
double empirical_l2(const SeriesFunction& f, const SeriesFunction& g,
                    std::span<const double> points);

/// Exact L2([0,1]^p) distance between additive functions.
double additive_l2_distance(const AdditiveFunction& f, const AdditiveFunction& g);

enum class BallKind { kHolder, kSobolev, kAnalytic };

/// Holder: sum k^a |b_k| <= Q.  Sobolev: sum k^{2a} b_k^2 <= Q^2.
/// Analytic: sum b_k^2 exp(k^2 / c) <= Q^2. `parameter` is a (or c).
struct SmoothnessBall {
  BallKind kind = BallKind::kHolder;
  double parameter = 1.0;
  double radius = 1.0;
};

/// The ball's defining sum (squared form for Sobolev and Analytic).
double ball_norm(const SeriesFunction& f, const SmoothnessBall& ball);
/// Right-hand side of the membership inequality: Q, or Q^2 for the
/// quadratic balls.
double ball_bound(const SmoothnessBall& ball);
bool in_ball(const SeriesFunction& f, const SmoothnessBall& ball);

/// Truth inside the ball with ball_norm = 0.9 * ball_bound, random signs.
SeriesFunction make_truth(const SmoothnessBall& ball, std::uint64_t seed, int truncation);

/// Sieve inequality ||f - f0||_inf^2 <= eta (m ||f - f0||_2^2 + delta^2).
/// eta_prime is the analogous constant of the concentration sets.
struct SieveSpec {
  int m = 1;
  double delta = 0.0;
  double eta = 1.0;
  double eta_prime = 1.0;

  SieveSpec() = default;
  SieveSpec(int m_, double delta_, double eta_) : m(m_), delta(delta_), eta(eta_), eta_prime(eta_) {}
  SieveSpec(int m_, double delta_, double eta_, double eta_prime_)
      : m(m_), delta(delta_), eta(eta_), eta_prime(eta_prime_) {}
};

bool sieve_condition_check(const SeriesFunction& f, const SeriesFunction& f0,
                           const SieveSpec& spec, int grid_size = kDefaultQuadraturePanels);

/// ||f - truth||_2 for many f expanded in one basis. Uses Parseval when the
/// bases are compatible; otherwise precomputes the quadrature Gram matrix so
/// each evaluation is a quadratic form in the coefficients.
class L2ErrorEvaluator {
 public:
  L2ErrorEvaluator(const SeriesFunction& truth, const Basis& basis, std::size_t count,
                   int panels = kDefaultQuadraturePanels);

  double operator()(std::span<const double> coefficients) const;
  double operator()(const SeriesFunction& f) const { return (*this)(f.coefficients()); }

 private:
  bool parseval_;
  std::vector<double> truth_coefficients_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd cross_;
  double truth_sq_ = 0.0;
};

}  // namespace bnpreg
