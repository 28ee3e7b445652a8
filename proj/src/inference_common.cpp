#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bnpreg/errors.hpp"
#include "bnpreg/inference.hpp"
#include "bnpreg/serialization.hpp"
#include "bnpreg/stats.hpp"
#include "inference_detail.hpp"

namespace bnpreg {

RegressionData::RegressionData(Design design_, std::vector<double> responses_, double sigma_)
    : design(std::move(design_)), responses(std::move(responses_)), sigma(sigma_) {
  if (responses.size() != design.size()) {
    std::ostringstream msg;
    msg << "design has " << design.size() << " points but " << responses.size() << " responses";
    throw DomainError(msg.str());
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("noise sigma must be positive");
  for (double y : responses)
    if (!std::isfinite(y)) throw DomainError("responses must be finite");
}

std::vector<double> simulate_responses(std::span<const double> clean, double sigma, Rng& rng) {
  if (sigma < 0.0) throw DomainError("noise sigma must be >= 0");
  std::vector<double> y(clean.begin(), clean.end());
  for (double& v : y) v += sigma * standard_normal(rng);
  return y;
}

void McmcConfig::validate() const {
  if (iterations < 1 || burn_in < 0 || thin < 1)
    throw ConfigError("MCMC needs iterations >= 1, burn_in >= 0 and thin >= 1");
  if (burn_in >= iterations)
    throw ConfigError("MCMC burn_in must be smaller than iterations (no draws would be kept)");
  if (birth < 0.0 || death < 0.0 || within < 0.0 ||
      std::abs(birth + death + within - 1.0) > 1e-9)
    throw ConfigError("MCMC move probabilities must be nonnegative and sum to 1");
  if (!(proposal_scale > 0.0)) throw ConfigError("MCMC proposal scale must be positive");
}

double gaussian_log_marginal(const Eigen::MatrixXd& b, std::span<const double> y, double sigma,
                             double prior_variance, int m) {
  if (m < 1 || m > b.cols() || static_cast<std::size_t>(b.rows()) != y.size())
    throw DomainError("gaussian_log_marginal: shape mismatch");
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const auto bm = b.leftCols(m);
  const Eigen::MatrixXd gram = bm.transpose() * bm;
  const Eigen::VectorXd cross = bm.transpose() * yv;
  return detail::log_marginal_from_gram(gram, cross, yv.squaredNorm(), y.size(), sigma,
                                        prior_variance);
}

std::string draws_to_jsonl(const PosteriorDraws& draws) {
  std::string out;
  for (const auto& f : draws.draws) {
    out += to_json(f).dump();
    out += '\n';
  }
  return out;
}

namespace detail {

double slice_sample(const std::function<double(double)>& log_f, double x0, double lo, double hi,
                    double width, Rng& rng) {
  const double f0 = log_f(x0);
  if (!std::isfinite(f0)) throw SamplerError("slice sampler started at a zero-density point");
  const double level = f0 - std::exponential_distribution<double>(1.0)(rng);
  double left = x0 - width * uniform01(rng);
  double right = left + width;
  int left_steps = static_cast<int>(32 * uniform01(rng));
  int right_steps = 31 - left_steps;
  while (left_steps-- > 0 && left > lo && log_f(left) > level) left -= width;
  while (right_steps-- > 0 && right < hi && log_f(right) > level) right += width;
  left = std::max(left, lo);
  right = std::min(right, hi);
  for (int attempt = 0; attempt < 200; ++attempt) {
    const double x1 = left + (right - left) * uniform01(rng);
    if (log_f(x1) > level) return x1;
    (x1 < x0 ? left : right) = x1;
  }
  return x0;
}

double log_marginal_from_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& cross,
                              double yy, std::size_t n, double sigma, double prior_variance,
                              Eigen::VectorXd* posterior_mean) {
  // Woodbury: with P = G / s^2 + I / v and h = c / s^2,
  // y^T S^{-1} y = |y|^2 / s^2 - h^T P^{-1} h and
  // log|S| = n log s^2 + m log v + log|P|.
  const double s2 = sigma * sigma;
  const Eigen::Index m = gram.rows();
  Eigen::MatrixXd precision = gram / s2;
  precision.diagonal().array() += 1.0 / prior_variance;
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("marginal likelihood: precision not SPD");
  const Eigen::VectorXd h = cross / s2;
  const Eigen::VectorXd mean = llt.solve(h);
  if (posterior_mean) *posterior_mean = mean;
  const double log_det_p =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double quad = yy / s2 - h.dot(mean);
  const double log_det = static_cast<double>(n) * std::log(s2) +
                         static_cast<double>(m) * std::log(prior_variance) + log_det_p;
  return -0.5 * (quad + log_det + static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
}

double norm_trace_ess(const std::vector<SeriesFunction>& draws) {
  if (draws.empty()) return 0.0;
  std::size_t count = 0;
  for (const auto& f : draws) count = std::max(count, f.size());
  const Basis& basis = draws.front().basis();
  std::vector<double> trace;
  trace.reserve(draws.size());
  if (is_orthonormal(basis)) {
    for (const auto& f : draws) {
      double ss = 0.0;
      for (double c : f.coefficients()) ss += c * c;
      trace.push_back(std::sqrt(ss));
    }
  } else {
    const L2ErrorEvaluator norm(SeriesFunction::zero(basis, 0), basis, count, 1024);
    for (const auto& f : draws) {
      std::vector<double> c(f.coefficients().begin(), f.coefficients().end());
      c.resize(count, 0.0);
      trace.push_back(norm(c));
    }
  }
  return effective_sample_size(trace);
}

}  // namespace detail

}  // namespace bnpreg
