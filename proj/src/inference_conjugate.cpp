#include <algorithm>
#include <cmath>
#include <sstream>

#include "bnpreg/errors.hpp"
#include "bnpreg/inference.hpp"
#include "inference_detail.hpp"

namespace bnpreg {

Eigen::VectorXd GaussianPosterior::sample(Rng& rng) const {
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(rng);
  return mean + precision_factor.transpose().triangularView<Eigen::Upper>().solve(z);
}

GaussianPosterior conjugate_gaussian_update(const Eigen::MatrixXd& b, std::span<const double> y,
                                            double sigma) {
  if (static_cast<std::size_t>(b.rows()) != y.size())
    throw DomainError("conjugate update: design matrix and responses differ in length");
  if (!(sigma > 0.0)) throw DomainError("conjugate update needs sigma > 0");
  const double s2 = sigma * sigma;
  Eigen::MatrixXd precision = b.transpose() * b / s2;
  precision.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(precision, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "posterior precision is not positive definite (condition number "
        << eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff() << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  GaussianPosterior post;
  post.mean = llt.solve(b.transpose() * yv / s2);
  post.covariance = llt.solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
  post.covariance = 0.5 * (post.covariance + post.covariance.transpose()).eval();
  post.precision_factor = llt.matrixL();
  return post;
}

GaussianPosterior fit_spline_conjugate(const RegressionData& data,
                                       const GaussianSplinePrior& prior) {
  if (data.design.dimension() != 1) throw UnsupportedError("spline regression needs a 1-D design");
  const Basis basis = prior.basis();
  return conjugate_gaussian_update(
      design_matrix(basis, data.design.points(), static_cast<std::size_t>(prior.dimension())),
      data.responses, data.sigma);
}

std::vector<double> GpPosterior::variance() const {
  std::vector<double> v(static_cast<std::size_t>(covariance.rows()));
  for (Eigen::Index i = 0; i < covariance.rows(); ++i)
    v[static_cast<std::size_t>(i)] = std::max(0.0, covariance(i, i));
  return v;
}

std::vector<double> GpPosterior::sample(Rng& rng) const {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(rng);
  const Eigen::VectorXd scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::VectorXd f = mean + eig.eigenvectors() * scale.cwiseProduct(z);
  return {f.data(), f.data() + f.size()};
}

GpPosterior gp_posterior(std::span<const double> points, std::span<const double> y, double sigma,
                         std::span<const double> query, const SEGPPrior& prior) {
  if (points.size() != y.size()) throw DomainError("GP: points and responses differ in length");
  GpPosterior post;
  post.grid.assign(query.begin(), query.end());
  const Eigen::MatrixXd kqq = se_kernel(query, query);
  const auto q = static_cast<Eigen::Index>(query.size());
  if (points.empty()) {
    post.mean = Eigen::VectorXd::Zero(q);
    post.covariance = kqq;
    return post;
  }
  Eigen::MatrixXd k = se_kernel(points, points);
  k.diagonal().array() += sigma * sigma;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = prior.jitter;
  for (;; jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    llt.compute(kj);
    if (llt.info() == Eigen::Success) break;
    if (jitter >= 1e-6) {
      std::ostringstream msg;
      msg << "GP kernel matrix not factorizable with jitter up to " << jitter;
      throw NumericalError(msg.str());
    }
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::MatrixXd ks = se_kernel(points, query);
  post.mean = ks.transpose() * llt.solve(yv);
  const Eigen::MatrixXd v = llt.matrixL().solve(ks);
  post.covariance = kqq - v.transpose() * v;
  return post;
}

GpPosterior fit_gp(const RegressionData& data, const SEGPPrior& prior,
                   std::span<const double> query) {
  if (data.design.dimension() != 1) throw UnsupportedError("GP regression needs a 1-D design");
  return gp_posterior(data.design.points(), data.responses, data.sigma, query, prior);
}

PosteriorDraws fit_spline_metropolis(const RegressionData& data, const GaussianSplinePrior& prior,
                                     const McmcConfig& config) {
  config.validate();
  if (data.design.dimension() != 1) throw UnsupportedError("spline regression needs a 1-D design");
  const Basis basis = prior.basis();
  const int m = prior.dimension();
  const Eigen::MatrixXd b =
      design_matrix(basis, data.design.points(), static_cast<std::size_t>(m));
  const Eigen::Map<const Eigen::VectorXd> y(data.responses.data(),
                                            static_cast<Eigen::Index>(data.size()));
  const double inv_s2 = config.likelihood ? 1.0 / (data.sigma * data.sigma) : 0.0;
  Rng rng(config.seed);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd residual = y;
  std::vector<double> step(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k)
    step[static_cast<std::size_t>(k)] =
        2.4 * config.proposal_scale / std::sqrt(b.col(k).squaredNorm() * inv_s2 + 1.0);

  PosteriorDraws out;
  int accepted = 0;
  int proposed = 0;
  for (int it = 0; it < config.iterations; ++it) {
    for (int k = 0; k < m; ++k) {
      const double d = step[static_cast<std::size_t>(k)] * standard_normal(rng);
      const double cur = beta[k];
      const double dll =
          -0.5 * inv_s2 * (d * d * b.col(k).squaredNorm() - 2.0 * d * residual.dot(b.col(k)));
      const double dlp = -0.5 * ((cur + d) * (cur + d) - cur * cur);
      ++proposed;
      if (std::log(uniform01(rng)) < dll + dlp) {
        beta[k] = cur + d;
        residual -= d * b.col(k);
        ++accepted;
      }
    }
    if (it % 1000 == 999) residual = y - b * beta;
    if (config.keep(it)) out.draws.emplace_back(basis, std::vector<double>(beta.data(), beta.data() + m));
  }
  out.diagnostics.acceptance["within"] = detail::accept_rate(accepted, proposed);
  out.diagnostics.seed = config.seed;
  out.diagnostics.kept = out.draws.size();
  out.diagnostics.ess = detail::norm_trace_ess(out.draws);
  return out;
}

}  // namespace bnpreg
