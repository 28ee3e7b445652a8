#include <algorithm>
#include <cmath>
#include <limits>

#include "bnpreg/errors.hpp"
#include "bnpreg/inference.hpp"
#include "bnpreg/stats.hpp"
#include "inference_detail.hpp"

namespace bnpreg {

namespace {

// Centered columns psi_k(x_ij) - int psi_k for k >= 2, grown on demand.
class CenteredColumns {
 public:
  CenteredColumns(FourierBasis basis, const Design& design, std::size_t p)
      : basis_(basis), coords_(p), columns_(p), norms_(p) {
    for (std::size_t j = 0; j < p; ++j) coords_[j] = design.column(j);
  }

  // Column for psi_{k+2} of coordinate j.
  const Eigen::VectorXd& column(std::size_t j, std::size_t k) {
    auto& cols = columns_[j];
    while (cols.size() <= k) {
      const int index = static_cast<int>(cols.size()) + 2;
      const double shift = basis_.integral(index);
      Eigen::VectorXd c(static_cast<Eigen::Index>(coords_[j].size()));
      for (std::size_t i = 0; i < coords_[j].size(); ++i)
        c[static_cast<Eigen::Index>(i)] = basis_(index, coords_[j][i]) - shift;
      norms_[j].push_back(c.squaredNorm());
      cols.push_back(std::move(c));
    }
    return cols[k];
  }
  double norm2(std::size_t j, std::size_t k) {
    column(j, k);
    return norms_[j][k];
  }

 private:
  FourierBasis basis_;
  std::vector<std::vector<double>> coords_;
  std::vector<std::vector<Eigen::VectorXd>> columns_;
  std::vector<std::vector<double>> norms_;
};

}  // namespace

AdditiveDraws fit_sparse_additive(const RegressionData& data, const SparseAdditivePrior& prior,
                                  const McmcConfig& config, const SparseAdditiveOptions& options) {
  config.validate();
  if (prior.p < 1) throw DomainError("sparse additive model needs p >= 1");
  prior.component.validate();
  if (!(prior.mu_sd > 0.0)) throw ConfigError("sparse additive model needs mu_sd > 0");
  const auto p = static_cast<std::size_t>(prior.p);
  if (data.design.dimension() != p) throw DomainError("design dimension differs from prior p");
  if (!options.forced_inactive.empty() && options.forced_inactive.size() != p)
    throw DomainError("forced_inactive must be empty or have one flag per coordinate");
  auto forced = [&](std::size_t j) {
    return !options.forced_inactive.empty() && options.forced_inactive[j] != 0;
  };

  const FiniteRandomSeriesPrior& comp = prior.component;
  const FourierBasis basis(comp.convention);
  const std::size_t n = data.size();
  const Eigen::Map<const Eigen::VectorXd> y(data.responses.data(), static_cast<Eigen::Index>(n));
  const double inv_s2 = config.likelihood ? 1.0 / (data.sigma * data.sigma) : 0.0;
  const double var_g = exponential_power_variance(comp.tau, comp.tau0);
  auto log_g = [&](double b) { return log_exponential_power(b, comp.tau, comp.tau0); };
  auto log_pi = [&](std::size_t m) {
    return log_zero_truncated_poisson(static_cast<int>(m), comp.lambda);
  };
  auto log_mu_prior = [&](double mu) {
    const double z = (mu - prior.mu_mean) / prior.mu_sd;
    return -0.5 * z * z;
  };
  // Prior odds of z_j = 1 against z_j = 0.
  const double log_activation_odds = p > 1 ? -std::log(static_cast<double>(p - 1)) : 0.0;

  CenteredColumns cols(basis, data.design, p);
  Rng rng(config.seed);

  double mu = prior.mu_mean;
  std::vector<std::uint8_t> z(p, 0);
  std::vector<std::vector<double>> coef(p);
  std::size_t n_terms = 1;

  if (config.likelihood) {
    // All free coordinates on; N and the coefficients from the best ridge fit.
    for (std::size_t j = 0; j < p; ++j) z[j] = forced(j) ? 0 : 1;
    std::size_t active = 0;
    for (auto v : z) active += v;
    const std::size_t cap = active == 0 ? 1 : std::max<std::size_t>(1, n / (2 * active) + 1);
    const std::size_t max_n = std::min<std::size_t>(12, cap);
    const double mu_scale = prior.mu_sd / std::sqrt(var_g);
    const Eigen::VectorXd y0 = y.array() - prior.mu_mean;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m <= max_n; ++m) {
      const auto width = static_cast<Eigen::Index>(1 + active * (m - 1));
      Eigen::MatrixXd b(static_cast<Eigen::Index>(n), width);
      b.col(0).setConstant(mu_scale);
      Eigen::Index c = 1;
      for (std::size_t j = 0; j < p; ++j)
        if (z[j])
          for (std::size_t k = 0; k + 1 < m; ++k) b.col(c++) = cols.column(j, k);
      Eigen::VectorXd mean;
      const double score =
          detail::log_marginal_from_gram(b.transpose() * b, b.transpose() * y0, y0.squaredNorm(),
                                         n, data.sigma, var_g, &mean) +
          log_pi(m);
      if (score > best) {
        best = score;
        n_terms = m;
        mu = prior.mu_mean + mu_scale * mean[0];
        c = 1;
        for (std::size_t j = 0; j < p; ++j) {
          coef[j].clear();
          if (z[j])
            for (std::size_t k = 0; k + 1 < m; ++k) coef[j].push_back(mean[c++]);
        }
      }
    }
  } else {
    const AdditiveFunction draw = sample_prior(prior, rng);
    mu = draw.mu;
    n_terms = draw.components.front().size();
    for (std::size_t j = 0; j < p; ++j) {
      z[j] = forced(j) ? 0 : draw.active[j];
      if (z[j]) coef[j].assign(draw.components[j].coefficients().begin() + 1,
                               draw.components[j].coefficients().end());
    }
  }

  auto contribution = [&](std::size_t j) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < coef[j].size(); ++k) v += coef[j][k] * cols.column(j, k);
    return v;
  };
  auto recompute_residual = [&] {
    Eigen::VectorXd r = y.array() - mu;
    for (std::size_t j = 0; j < p; ++j)
      if (z[j]) r -= contribution(j);
    return r;
  };
  Eigen::VectorXd residual = recompute_residual();
  // Change in log-likelihood when the fitted values move by v.
  auto delta_ll = [&](const Eigen::VectorXd& v) {
    if (inv_s2 == 0.0) return 0.0;
    return -0.5 * inv_s2 * (v.squaredNorm() - 2.0 * residual.dot(v));
  };

  const double mu_step = 2.4 * config.proposal_scale /
                         std::sqrt(static_cast<double>(n) * inv_s2 + 1.0 / (prior.mu_sd * prior.mu_sd));
  const double log_birth_ratio = std::log(config.death) - std::log(config.birth);
  std::discrete_distribution<int> move({config.birth, config.death, config.within});
  int mu_n = 0, mu_ok = 0, flip_n = 0, flip_ok = 0, birth_n = 0, birth_ok = 0;
  int death_n = 0, death_ok = 0, within_n = 0, within_ok = 0;

  AdditiveDraws out;
  std::vector<double> norm_trace;
  for (int it = 0; it < config.iterations; ++it) {
    {
      ++mu_n;
      const double d = mu_step * standard_normal(rng);
      const double dll = inv_s2 == 0.0 ? 0.0
                                       : -0.5 * inv_s2 * (static_cast<double>(n) * d * d -
                                                          2.0 * d * residual.sum());
      if (std::log(uniform01(rng)) < dll + log_mu_prior(mu + d) - log_mu_prior(mu)) {
        mu += d;
        residual.array() -= d;
        ++mu_ok;
      }
    }

    if (p > 1) {
      for (std::size_t j = 0; j < p; ++j) {
        if (forced(j)) continue;
        ++flip_n;
        if (!z[j]) {
          // Birth of the component with coefficients drawn from g.
          std::vector<double> proposal(n_terms - 1);
          for (double& b : proposal) b = sample_exponential_power(comp.tau, comp.tau0, rng);
          std::swap(coef[j], proposal);
          const Eigen::VectorXd v = contribution(j);
          if (std::log(uniform01(rng)) < delta_ll(v) + log_activation_odds) {
            z[j] = 1;
            residual -= v;
            ++flip_ok;
          } else {
            coef[j].clear();
          }
        } else {
          const Eigen::VectorXd v = -contribution(j);
          if (std::log(uniform01(rng)) < delta_ll(v) - log_activation_odds) {
            z[j] = 0;
            coef[j].clear();
            residual -= v;
            ++flip_ok;
          }
        }
      }
    }

    switch (move(rng)) {
      case 0: {
        ++birth_n;
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        std::vector<double> fresh(p, 0.0);
        for (std::size_t j = 0; j < p; ++j) {
          if (!z[j]) continue;
          fresh[j] = sample_exponential_power(comp.tau, comp.tau0, rng);
          v += fresh[j] * cols.column(j, n_terms - 1);
        }
        if (std::log(uniform01(rng)) <
            delta_ll(v) + log_pi(n_terms + 1) - log_pi(n_terms) + log_birth_ratio) {
          for (std::size_t j = 0; j < p; ++j)
            if (z[j]) coef[j].push_back(fresh[j]);
          residual -= v;
          ++n_terms;
          ++birth_ok;
        }
        break;
      }
      case 1: {
        ++death_n;
        if (n_terms == 1) break;
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < p; ++j)
          if (z[j]) v -= coef[j].back() * cols.column(j, n_terms - 2);
        if (std::log(uniform01(rng)) <
            delta_ll(v) + log_pi(n_terms - 1) - log_pi(n_terms) - log_birth_ratio) {
          for (std::size_t j = 0; j < p; ++j)
            if (z[j]) coef[j].pop_back();
          residual -= v;
          --n_terms;
          ++death_ok;
        }
        break;
      }
      default: {
        for (std::size_t j = 0; j < p; ++j) {
          if (!z[j]) continue;
          for (std::size_t k = 0; k < coef[j].size(); ++k) {
            ++within_n;
            const double step =
                2.4 * config.proposal_scale / std::sqrt(cols.norm2(j, k) * inv_s2 + 1.0 / var_g);
            const double d = step * standard_normal(rng);
            const Eigen::VectorXd& c = cols.column(j, k);
            const double dll = inv_s2 == 0.0 ? 0.0
                                             : -0.5 * inv_s2 *
                                                   (d * d * cols.norm2(j, k) - 2.0 * d * residual.dot(c));
            if (std::log(uniform01(rng)) < dll + log_g(coef[j][k] + d) - log_g(coef[j][k])) {
              coef[j][k] += d;
              residual -= d * c;
              ++within_ok;
            }
          }
        }
      }
    }
    if (it % 1000 == 999) residual = recompute_residual();

    if (config.keep(it)) {
      AdditiveFunction f;
      f.mu = mu;
      f.active = z;
      std::vector<double> hyper(z.begin(), z.end());
      hyper.push_back(static_cast<double>(n_terms));
      double ss = mu * mu;
      for (std::size_t j = 0; j < p; ++j) {
        if (z[j]) {
          f.components.emplace_back(basis, center_component(coef[j], comp.convention));
          for (double b : coef[j]) ss += b * b;
        } else {
          f.components.emplace_back(basis, std::vector<double>{});
        }
      }
      norm_trace.push_back(std::sqrt(ss));
      out.draws.push_back(std::move(f));
      out.hyper.push_back(std::move(hyper));
    }
  }
  out.diagnostics.acceptance["mu"] = detail::accept_rate(mu_ok, mu_n);
  out.diagnostics.acceptance["flip"] = detail::accept_rate(flip_ok, flip_n);
  out.diagnostics.acceptance["birth"] = detail::accept_rate(birth_ok, birth_n);
  out.diagnostics.acceptance["death"] = detail::accept_rate(death_ok, death_n);
  out.diagnostics.acceptance["within"] = detail::accept_rate(within_ok, within_n);
  out.diagnostics.seed = config.seed;
  out.diagnostics.kept = out.draws.size();
  // Coefficient-norm trace: sqrt(mu^2 + sum of free coefficients squared).
  out.diagnostics.ess = effective_sample_size(norm_trace);
  return out;
}

}  // namespace bnpreg
