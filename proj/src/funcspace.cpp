#include "bnpreg/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bnpreg/errors.hpp"
#include "bnpreg/numerics.hpp"
#include "bnpreg/rng.hpp"

namespace bnpreg {

SeriesFunction::SeriesFunction(Basis basis, std::vector<double> coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() > basis_capacity(basis_)) {
    std::ostringstream msg;
    msg << "series has " << coefficients_.size() << " coefficients but the "
        << basis_name(basis_) << " basis carries " << basis_capacity(basis_);
    throw DomainError(msg.str());
  }
  for (double c : coefficients_)
    if (!std::isfinite(c)) throw DomainError("series coefficients must be finite");
}

SeriesFunction SeriesFunction::zero(Basis basis, std::size_t size) {
  return SeriesFunction(std::move(basis), std::vector<double>(size, 0.0));
}

double SeriesFunction::operator()(double x) const {
  if (coefficients_.empty()) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("evaluation point outside [0, 1]");
    return 0.0;
  }
  std::vector<double> values(coefficients_.size());
  basis_values(basis_, x, values);
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += coefficients_[i] * values[i];
  return sum;
}

std::vector<double> SeriesFunction::evaluate(std::span<const double> xs) const {
  std::vector<double> out(xs.size(), 0.0);
  if (coefficients_.empty()) return out;
  std::vector<double> values(coefficients_.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    basis_values(basis_, xs[i], values);
    double sum = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) sum += coefficients_[k] * values[k];
    out[i] = sum;
  }
  return out;
}

double SeriesFunction::integral() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < coefficients_.size(); ++i)
    if (coefficients_[i] != 0.0) sum += coefficients_[i] * basis_integral(basis_, i);
  return sum;
}

SeriesFunction SeriesFunction::scaled(double factor) const {
  std::vector<double> c(coefficients_);
  for (double& v : c) v *= factor;
  return SeriesFunction(basis_, std::move(c));
}

int AdditiveFunction::active_count() const {
  int count = 0;
  for (auto z : active) count += z ? 1 : 0;
  return count;
}

double AdditiveFunction::operator()(std::span<const double> x) const {
  if (x.size() != components.size()) throw DomainError("additive function: dimension mismatch");
  double sum = mu;
  for (std::size_t j = 0; j < components.size(); ++j)
    if (active[j]) sum += components[j](x[j]);
  return sum;
}

bool parseval_compatible(const Basis& a, const Basis& b) {
  if (const auto* fa = std::get_if<FourierBasis>(&a)) {
    const auto* fb = std::get_if<FourierBasis>(&b);
    return fb && fa->orthonormal() && fb->orthonormal();
  }
  return std::holds_alternative<HaarWaveletBasis>(a) && std::holds_alternative<HaarWaveletBasis>(b);
}

double l2_distance(const SeriesFunction& f, const SeriesFunction& g, int panels) {
  if (parseval_compatible(f.basis(), g.basis())) {
    const auto a = f.coefficients();
    const auto b = g.coefficients();
    double ss = 0.0;
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
      const double d = (i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0);
      ss += d * d;
    }
    return std::sqrt(ss);
  }
  const auto nodes = midpoint_nodes(panels);
  const auto fv = f.evaluate(nodes);
  const auto gv = g.evaluate(nodes);
  double ss = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) ss += (fv[i] - gv[i]) * (fv[i] - gv[i]);
  return std::sqrt(ss / panels);
}

double l2_norm(const SeriesFunction& f, int panels) {
  return l2_distance(f, SeriesFunction::zero(f.basis(), 0), panels);
}

namespace {

std::vector<double> sup_grid(int grid_size) {
  if (grid_size < 256) throw DomainError("sup-norm grid needs at least 256 points");
  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i)
    grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (grid_size - 1);
  return grid;
}

}  // namespace

double sup_norm(const SeriesFunction& f, int grid_size) {
  double sup = 0.0;
  for (double v : f.evaluate(sup_grid(grid_size))) sup = std::max(sup, std::abs(v));
  return sup;
}

double sup_distance(const SeriesFunction& f, const SeriesFunction& g, int grid_size) {
  const auto grid = sup_grid(grid_size);
  const auto fv = f.evaluate(grid);
  const auto gv = g.evaluate(grid);
  double sup = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) sup = std::max(sup, std::abs(fv[i] - gv[i]));
  return sup;
}

double empirical_l2(const SeriesFunction& f, const SeriesFunction& g,
                    std::span<const double> points) {
  if (points.empty()) throw DomainError("empirical L2 distance needs a nonempty design");
  const auto fv = f.evaluate(points);
  const auto gv = g.evaluate(points);
  double ss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) ss += (fv[i] - gv[i]) * (fv[i] - gv[i]);
  return std::sqrt(ss / static_cast<double>(points.size()));
}

double empirical_l2(const SeriesFunction& f, const SeriesFunction& g, const Design& design) {
  if (design.dimension() != 1)
    throw UnsupportedError("empirical L2 distance of series functions needs a 1-D design");
  return empirical_l2(f, g, design.points());
}

double additive_l2_distance(const AdditiveFunction& f, const AdditiveFunction& g) {
  if (f.dimension() != g.dimension()) throw DomainError("additive functions differ in dimension");
  // Coordinates are independent under Lebesgue measure on the cube, so
  // ||c + sum d_j||^2 = (c + sum E d_j)^2 + sum Var d_j.
  double shift = f.mu - g.mu;
  double variance = 0.0;
  for (std::size_t j = 0; j < f.dimension(); ++j) {
    const double zf = f.active[j] ? 1.0 : 0.0;
    const double zg = g.active[j] ? 1.0 : 0.0;
    if (zf == 0.0 && zg == 0.0) continue;
    const SeriesFunction a = f.components[j].scaled(zf);
    const SeriesFunction b = g.components[j].scaled(zg);
    const double m = a.integral() - b.integral();
    const double d = l2_distance(a, b);
    shift += m;
    variance += std::max(0.0, d * d - m * m);
  }
  return std::sqrt(shift * shift + variance);
}

namespace {

void require_fourier(const SeriesFunction& f) {
  if (!std::holds_alternative<FourierBasis>(f.basis()))
    throw UnsupportedError("smoothness balls are defined on Fourier coefficients only");
}

}  // namespace

double ball_norm(const SeriesFunction& f, const SmoothnessBall& ball) {
  require_fourier(f);
  const auto beta = f.coefficients();
  double sum = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (beta[i] == 0.0) continue;
    const double k = static_cast<double>(i + 1);
    switch (ball.kind) {
      case BallKind::kHolder:
        sum += std::pow(k, ball.parameter) * std::abs(beta[i]);
        break;
      case BallKind::kSobolev:
        sum += std::pow(k, 2.0 * ball.parameter) * beta[i] * beta[i];
        break;
      case BallKind::kAnalytic:
        sum += std::exp(2.0 * std::log(std::abs(beta[i])) + k * k / ball.parameter);
        break;
    }
  }
  return sum;
}

double ball_bound(const SmoothnessBall& ball) {
  return ball.kind == BallKind::kHolder ? ball.radius : ball.radius * ball.radius;
}

bool in_ball(const SeriesFunction& f, const SmoothnessBall& ball) {
  return ball_norm(f, ball) <= ball_bound(ball);
}

SeriesFunction make_truth(const SmoothnessBall& ball, std::uint64_t seed, int truncation) {
  if (truncation < 1) throw DomainError("truth truncation must be >= 1");
  if (!(ball.parameter > 0.0) || !(ball.radius > 0.0))
    throw ConfigError("smoothness ball needs positive parameter and radius");
  Rng rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> shape(static_cast<std::size_t>(truncation));
  double functional = 0.0;  // ball functional of the unscaled shape
  for (int i = 0; i < truncation; ++i) {
    const double k = i + 1.0;
    const double sign = coin(rng) ? 1.0 : -1.0;
    double w = 0.0;
    switch (ball.kind) {
      case BallKind::kHolder:
        w = std::pow(k, -(ball.parameter + 1.0));
        functional += std::pow(k, ball.parameter) * w;
        break;
      case BallKind::kSobolev:
        w = std::pow(k, -ball.parameter - 0.55);
        functional += std::pow(k, 2.0 * ball.parameter) * w * w;
        break;
      case BallKind::kAnalytic:
        // exp(-k^2 / (2 c')) with c' = c / 2, so each term of the analytic
        // functional is exp(-k^2 / c).
        w = std::exp(-k * k / ball.parameter);
        functional += std::exp(-k * k / ball.parameter);
        break;
    }
    shape[static_cast<std::size_t>(i)] = sign * w;
  }
  if (!std::isfinite(functional) || functional <= 0.0) {
    std::ostringstream msg;
    msg << "cannot calibrate truth to 0.9 of the ball bound with truncation " << truncation;
    throw ConfigError(msg.str());
  }
  const double target = 0.9 * ball_bound(ball);
  const double scale = (ball.kind == BallKind::kHolder ? target / functional
                                                       : std::sqrt(target / functional)) *
                       (1.0 - 1e-12);
  for (double& v : shape) v *= scale;
  SeriesFunction truth(FourierBasis{}, std::move(shape));
  if (!(ball_norm(truth, ball) <= target)) throw ConfigError("truth calibration overshot the ball");
  return truth;
}

bool sieve_condition_check(const SeriesFunction& f, const SeriesFunction& f0,
                           const SieveSpec& spec, int grid_size) {
  const double sup = sup_distance(f, f0, grid_size);
  const double l2 = l2_distance(f, f0);
  const double rhs = spec.eta * (spec.m * l2 * l2 + spec.delta * spec.delta);
  // Relative slack absorbs rounding in the equality case.
  return sup * sup <= rhs * (1.0 + 1e-12);
}

L2ErrorEvaluator::L2ErrorEvaluator(const SeriesFunction& truth, const Basis& basis,
                                   std::size_t count, int panels)
    : parseval_(parseval_compatible(truth.basis(), basis)) {
  if (parseval_) {
    truth_coefficients_.assign(truth.coefficients().begin(), truth.coefficients().end());
    return;
  }
  const auto nodes = midpoint_nodes(panels);
  const Eigen::MatrixXd values = design_matrix(basis, nodes, count);
  const auto truth_values = truth.evaluate(nodes);
  const Eigen::Map<const Eigen::VectorXd> t(truth_values.data(),
                                            static_cast<Eigen::Index>(truth_values.size()));
  gram_ = values.transpose() * values / static_cast<double>(panels);
  cross_ = values.transpose() * t / static_cast<double>(panels);
  truth_sq_ = t.squaredNorm() / panels;
}

double L2ErrorEvaluator::operator()(std::span<const double> coefficients) const {
  if (parseval_) {
    double ss = 0.0;
    const std::size_t len = std::max(coefficients.size(), truth_coefficients_.size());
    for (std::size_t i = 0; i < len; ++i) {
      const double d = (i < coefficients.size() ? coefficients[i] : 0.0) -
                       (i < truth_coefficients_.size() ? truth_coefficients_[i] : 0.0);
      ss += d * d;
    }
    return std::sqrt(ss);
  }
  if (static_cast<Eigen::Index>(coefficients.size()) != gram_.rows())
    throw DomainError("L2 error evaluator: coefficient count mismatch");
  const Eigen::Map<const Eigen::VectorXd> b(coefficients.data(), gram_.rows());
  const double sq = b.dot(gram_ * b) - 2.0 * b.dot(cross_) + truth_sq_;
  return std::sqrt(std::max(0.0, sq));
}

}  // namespace bnpreg
