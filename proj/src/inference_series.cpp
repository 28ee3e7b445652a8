#include <algorithm>
#include <cmath>
#include <limits>

#include "bnpreg/errors.hpp"
#include "bnpreg/inference.hpp"
#include "inference_detail.hpp"

namespace bnpreg {

namespace {

// Lazily grown columns psi_k(x_i) with their squared norms.
class ColumnCache {
 public:
  ColumnCache(FourierBasis basis, std::span<const double> x) : basis_(basis), x_(x) {}

  const Eigen::VectorXd& column(std::size_t k) {
    while (columns_.size() <= k) {
      const int index = static_cast<int>(columns_.size()) + 1;
      Eigen::VectorXd c(static_cast<Eigen::Index>(x_.size()));
      for (std::size_t i = 0; i < x_.size(); ++i)
        c[static_cast<Eigen::Index>(i)] = basis_(index, x_[i]);
      norms_.push_back(c.squaredNorm());
      columns_.push_back(std::move(c));
    }
    return columns_[k];
  }
  double norm2(std::size_t k) {
    column(k);
    return norms_[k];
  }

 private:
  FourierBasis basis_;
  std::span<const double> x_;
  std::vector<Eigen::VectorXd> columns_;
  std::vector<double> norms_;
};

}  // namespace

PosteriorDraws fit_random_series_rjmcmc(const RegressionData& data,
                                        const FiniteRandomSeriesPrior& prior,
                                        const McmcConfig& config) {
  config.validate();
  prior.validate();
  if (data.design.dimension() != 1) throw UnsupportedError("random series prior needs a 1-D design");
  const FourierBasis basis(prior.convention);
  const auto x = data.design.points();
  const Eigen::Map<const Eigen::VectorXd> y(data.responses.data(),
                                            static_cast<Eigen::Index>(data.size()));
  const double inv_s2 = config.likelihood ? 1.0 / (data.sigma * data.sigma) : 0.0;
  const double var_g = exponential_power_variance(prior.tau, prior.tau0);
  auto log_g = [&](double b) { return log_exponential_power(b, prior.tau, prior.tau0); };
  auto log_pi = [&](std::size_t m) {
    return log_zero_truncated_poisson(static_cast<int>(m), prior.lambda);
  };
  ColumnCache cols(basis, x);
  Rng rng(config.seed);

  std::vector<double> beta;
  if (config.likelihood) {
    // Start at the best ridge fit under a Gaussian surrogate of g.
    const int max_n = std::max(1, std::min<int>(40, static_cast<int>(data.size()) / 2));
    const Eigen::MatrixXd b = design_matrix(basis, x, static_cast<std::size_t>(max_n));
    const Eigen::MatrixXd gram = b.transpose() * b;
    const Eigen::VectorXd cross = b.transpose() * y;
    double best = -std::numeric_limits<double>::infinity();
    for (int m = 1; m <= max_n; ++m) {
      Eigen::VectorXd mean;
      const double score = detail::log_marginal_from_gram(gram.topLeftCorner(m, m), cross.head(m),
                                                          y.squaredNorm(), data.size(),
                                                          data.sigma, var_g, &mean) +
                           log_pi(static_cast<std::size_t>(m));
      if (score > best) {
        best = score;
        beta.assign(mean.data(), mean.data() + m);
      }
    }
  } else {
    const SeriesFunction draw = sample_prior(prior, rng);
    beta.assign(draw.coefficients().begin(), draw.coefficients().end());
  }

  auto recompute_residual = [&] {
    Eigen::VectorXd r = y;
    for (std::size_t k = 0; k < beta.size(); ++k) r -= beta[k] * cols.column(k);
    return r;
  };
  Eigen::VectorXd residual = recompute_residual();
  // Change in log-likelihood when beta_k moves by d.
  auto delta_ll = [&](std::size_t k, double d) {
    if (inv_s2 == 0.0) return 0.0;
    return -0.5 * inv_s2 * (d * d * cols.norm2(k) - 2.0 * d * residual.dot(cols.column(k)));
  };
  auto step = [&](std::size_t k) {
    return 2.4 * config.proposal_scale / std::sqrt(cols.norm2(k) * inv_s2 + 1.0 / var_g);
  };

  const double log_birth_ratio = std::log(config.death) - std::log(config.birth);
  std::discrete_distribution<int> move({config.birth, config.death, config.within});
  int births = 0, birth_ok = 0, deaths = 0, death_ok = 0, withins = 0, within_ok = 0;
  PosteriorDraws out;
  for (int it = 0; it < config.iterations; ++it) {
    const std::size_t n_terms = beta.size();
    switch (move(rng)) {
      case 0: {
        ++births;
        const double b = sample_exponential_power(prior.tau, prior.tau0, rng);
        const double log_alpha =
            delta_ll(n_terms, b) + log_pi(n_terms + 1) - log_pi(n_terms) + log_birth_ratio;
        if (std::log(uniform01(rng)) < log_alpha) {
          residual -= b * cols.column(n_terms);
          beta.push_back(b);
          ++birth_ok;
        }
        break;
      }
      case 1: {
        ++deaths;
        if (n_terms == 1) break;
        const std::size_t k = n_terms - 1;
        const double log_alpha =
            delta_ll(k, -beta[k]) + log_pi(n_terms - 1) - log_pi(n_terms) - log_birth_ratio;
        if (std::log(uniform01(rng)) < log_alpha) {
          residual += beta[k] * cols.column(k);
          beta.pop_back();
          ++death_ok;
        }
        break;
      }
      default: {
        for (std::size_t k = 0; k < n_terms; ++k) {
          ++withins;
          const double d = step(k) * standard_normal(rng);
          const double log_alpha = delta_ll(k, d) + log_g(beta[k] + d) - log_g(beta[k]);
          if (std::log(uniform01(rng)) < log_alpha) {
            beta[k] += d;
            residual -= d * cols.column(k);
            ++within_ok;
          }
        }
      }
    }
    if (it % 1000 == 999) residual = recompute_residual();
    if (config.keep(it)) {
      out.draws.emplace_back(basis, beta);
      out.hyper.push_back({static_cast<double>(beta.size())});
    }
  }
  out.diagnostics.acceptance["birth"] = detail::accept_rate(birth_ok, births);
  out.diagnostics.acceptance["death"] = detail::accept_rate(death_ok, deaths);
  out.diagnostics.acceptance["within"] = detail::accept_rate(within_ok, withins);
  out.diagnostics.seed = config.seed;
  out.diagnostics.kept = out.draws.size();
  out.diagnostics.ess = detail::norm_trace_ess(out.draws);
  return out;
}

}  // namespace bnpreg
