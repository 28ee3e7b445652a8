#include "bnpreg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "bnpreg/errors.hpp"
#include "bnpreg/numerics.hpp"
#include "bnpreg/parallel.hpp"
#include "bnpreg/rng.hpp"
#include "bnpreg/stats.hpp"

namespace bnpreg {

namespace {

constexpr const char* kPriorNames[] = {"spline", "block_fourier", "block_wavelet",
                                       "random_series", "gp", "sparse_additive"};

BallKind ball_kind_from_string(const std::string& name) {
  if (name == "holder") return BallKind::kHolder;
  if (name == "sobolev") return BallKind::kSobolev;
  if (name == "analytic") return BallKind::kAnalytic;
  throw ConfigError("unknown truth ball '" + name + "' (expected holder, sobolev or analytic)");
}

FourierConvention convention_from_string(const std::string& name) {
  if (name == "orthonormal") return FourierConvention::kOrthonormal;
  if (name == "half_period") return FourierConvention::kHalfPeriod;
  throw ConfigError("unknown Fourier convention '" + name + "'");
}

int max_n(const ExperimentConfig& config) {
  return *std::max_element(config.n_grid.begin(), config.n_grid.end());
}

int spline_dimension(const PriorSettings& prior, int n) {
  const int m = static_cast<int>(std::ceil(prior.m_scale * std::pow(n, prior.m_exponent) - 1e-12));
  return std::max(prior.order, m);
}

}  // namespace

std::string to_string(PriorKind kind) { return kPriorNames[static_cast<int>(kind)]; }

PriorKind prior_kind_from_string(const std::string& name) {
  for (int i = 0; i < 6; ++i)
    if (name == kPriorNames[i]) return static_cast<PriorKind>(i);
  throw ConfigError("unknown prior kind '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (n_grid.empty()) throw ConfigError("experiment needs a nonempty n grid");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ConfigError("experiment sample sizes must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw ConfigError("experiment n grid must be strictly increasing");
  }
  if (replications < 1) throw ConfigError("experiment needs replications >= 1");
  if (sigma < 0.0 || !(model_sigma > 0.0)) throw ConfigError("experiment sigma must be >= 0");
  if (posterior_draws < 1) throw ConfigError("posterior draws must be >= 1");
  if (truth.truncation < 1) throw ConfigError("truth truncation must be >= 1");
  if (prior.kind == PriorKind::kSparseAdditive &&
      (prior.p < 1 || truth.active < 0 || truth.active > prior.p))
    throw ConfigError("sparse additive experiment needs p >= 1 and 0 <= truth.active <= p");
  if (prior.kind == PriorKind::kSpline && prior.order < 1)
    throw ConfigError("spline order must be >= 1");
  prior.series.validate();
  const bool uses_mcmc = prior.kind == PriorKind::kBlockFourier ||
                    prior.kind == PriorKind::kBlockWavelet ||
                    prior.kind == PriorKind::kRandomSeries ||
                    prior.kind == PriorKind::kSparseAdditive;
  if (uses_mcmc) mcmc.validate();
}

ExperimentConfig experiment_from_config(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.prior.kind = prior_kind_from_string(kv.get_string("prior.kind"));
  c.prior.order = kv.get_int("prior.order", c.prior.order);
  c.prior.m_exponent = kv.get_double("prior.m_exponent", c.prior.m_exponent);
  c.prior.m_scale = kv.get_double("prior.m_scale", c.prior.m_scale);
  c.prior.max_level = kv.get_int("prior.max_level", c.prior.max_level);
  c.prior.alpha_floor = kv.get_double("prior.alpha_floor", c.prior.alpha_floor);
  c.prior.series.lambda = kv.get_double("prior.lambda", c.prior.series.lambda);
  c.prior.series.tau = kv.get_double("prior.tau", c.prior.series.tau);
  c.prior.series.tau0 = kv.get_double("prior.tau0", c.prior.series.tau0);
  c.prior.series.convention =
      convention_from_string(kv.get_string("prior.convention", "orthonormal"));
  c.prior.p = kv.get_int("prior.p", c.prior.p);
  c.prior.mu_sd = kv.get_double("prior.mu_sd", c.prior.mu_sd);
  c.prior.gp.jitter = kv.get_double("prior.jitter", c.prior.gp.jitter);
  c.prior.gp.grid_size = kv.get_int("prior.grid_size", c.prior.gp.grid_size);

  c.truth.ball.kind = ball_kind_from_string(kv.get_string("truth.ball", "holder"));
  // truth.c names the analytic-class parameter; truth.alpha the smoothness.
  if (kv.has("truth.c") && kv.has("truth.alpha"))
    throw ConfigError("set only one of truth.alpha and truth.c");
  c.truth.ball.parameter =
      kv.get_double(kv.has("truth.c") ? "truth.c" : "truth.alpha", c.truth.ball.parameter);
  c.truth.ball.radius = kv.get_double("truth.radius", c.truth.ball.radius);
  c.truth.seed = kv.get_uint64("truth.seed", c.truth.seed);
  c.truth.truncation = kv.get_int("truth.truncation", c.truth.truncation);
  c.truth.active = kv.get_int("truth.active", c.truth.active);

  if (kv.has("grid.n")) {
    c.n_grid = kv.get_int_list("grid.n");
  } else {
    const int base = kv.get_int("grid.n_base", 100);
    const int doublings = kv.get_int("grid.doublings", 6);
    for (int i = 0; i <= doublings; ++i) c.n_grid.push_back(base << i);
  }
  c.replications = kv.get_int("replications", c.replications);
  c.design = design_kind_from_string(kv.get_string("design", "random-uniform"));
  c.sigma = kv.get_double("sigma", c.sigma);
  c.model_sigma = kv.get_double("model_sigma", c.model_sigma);
  c.posterior_draws = kv.get_int("posterior.draws", c.posterior_draws);
  c.seed = kv.get_uint64("seed", c.seed);

  c.mcmc.iterations = kv.get_int("mcmc.iterations", c.mcmc.iterations);
  c.mcmc.burn_in = kv.get_int("mcmc.burn_in", c.mcmc.burn_in);
  c.mcmc.thin = kv.get_int("mcmc.thin", c.mcmc.thin);
  c.mcmc.proposal_scale = kv.get_double("mcmc.proposal_scale", c.mcmc.proposal_scale);
  c.mcmc.birth = kv.get_double("mcmc.birth", c.mcmc.birth);
  c.mcmc.death = kv.get_double("mcmc.death", c.mcmc.death);
  c.mcmc.within = kv.get_double("mcmc.within", c.mcmc.within);

  // Keys read elsewhere (CLI paths and subcommand options) are not errors.
  for (const auto& key : kv.unused_keys()) {
    if (key.rfind("output.", 0) == 0 || key.rfind("test.", 0) == 0 ||
        key.rfind("sample.", 0) == 0 || key.rfind("check.", 0) == 0 || key.rfind("fit.", 0) == 0)
      continue;
    throw ConfigError(kv.source() + ": unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

SeriesFunction experiment_truth(const ExperimentConfig& config) {
  return make_truth(config.truth.ball, config.truth.seed, config.truth.truncation);
}

AdditiveFunction experiment_additive_truth(const ExperimentConfig& config) {
  const FourierConvention conv = config.prior.series.convention;
  AdditiveFunction f;
  for (int j = 0; j < config.prior.p; ++j) {
    const bool active = j < config.truth.active;
    f.active.push_back(active ? 1 : 0);
    if (!active) {
      f.components.emplace_back(FourierBasis(conv), std::vector<double>{});
      continue;
    }
    const SeriesFunction raw = make_truth(config.truth.ball,
                                          derive_seed(config.truth.seed, static_cast<std::uint64_t>(j)),
                                          config.truth.truncation);
    // Centering fixes the constant coefficient, so the truth's profile moves
    // to frequencies k >= 2 and is rescaled back to 0.9 of the ball.
    const auto c = raw.coefficients();
    const SeriesFunction centered(FourierBasis(conv), center_component(c, conv));
    const double ratio = 0.9 * ball_bound(config.truth.ball) / ball_norm(centered, config.truth.ball);
    const double scale = config.truth.ball.kind == BallKind::kHolder ? ratio : std::sqrt(ratio);
    f.components.push_back(centered.scaled(scale * (1.0 - 1e-12)));
  }
  return f;
}

PriorSpec experiment_prior(const ExperimentConfig& config, int n) {
  const PriorSettings& p = config.prior;
  switch (p.kind) {
    case PriorKind::kSpline: {
      const int m = spline_dimension(p, n);
      return GaussianSplinePrior{p.order, m - p.order + 1};
    }
    case PriorKind::kBlockFourier:
      return BlockPriorFourier::standard(
          p.max_level >= 0 ? p.max_level : default_block_level(max_n(config), p.alpha_floor));
    case PriorKind::kBlockWavelet:
      return BlockPriorWavelet::standard(
          p.max_level >= 0 ? p.max_level : default_wavelet_resolution(max_n(config), p.alpha_floor));
    case PriorKind::kRandomSeries:
      return p.series;
    case PriorKind::kGp:
      return p.gp;
    case PriorKind::kSparseAdditive:
      return SparseAdditivePrior{p.p, p.series, 0.0, p.mu_sd};
  }
  throw UnsupportedError("unhandled prior kind");
}

namespace {

Design cell_design(const ExperimentConfig& config, int n, std::uint64_t seed) {
  const std::size_t p = config.prior.kind == PriorKind::kSparseAdditive
                            ? static_cast<std::size_t>(config.prior.p)
                            : 1;
  if (config.design == DesignKind::kEquidistant) {
    if (p != 1) throw UnsupportedError("equidistant designs are one-dimensional");
    return equidistant_design(static_cast<std::size_t>(n));
  }
  return uniform_design(static_cast<std::size_t>(n), p, seed);
}

std::vector<double> series_errors(const std::vector<SeriesFunction>& draws,
                                  const SeriesFunction& truth) {
  std::size_t count = 0;
  for (const auto& f : draws) count = std::max(count, f.size());
  const L2ErrorEvaluator error(truth, draws.front().basis(), count);
  std::vector<double> out;
  out.reserve(draws.size());
  std::vector<double> padded;
  for (const auto& f : draws) {
    padded.assign(f.coefficients().begin(), f.coefficients().end());
    padded.resize(count, 0.0);
    out.push_back(error(padded));
  }
  return out;
}

}  // namespace

std::vector<double> contraction_cell(const ExperimentConfig& config, int n, int replication) {
  const auto n_index = static_cast<std::uint64_t>(
      std::find(config.n_grid.begin(), config.n_grid.end(), n) - config.n_grid.begin());
  const std::uint64_t cell = derive_seed(config.seed, n_index, static_cast<std::uint64_t>(replication));
  const Design design = cell_design(config, n, derive_seed(cell, 1));
  Rng noise(derive_seed(cell, 2));
  McmcConfig mcmc = config.mcmc;
  mcmc.seed = derive_seed(cell, 3);
  Rng post_rng(derive_seed(cell, 4));
  const double model_sigma = config.sigma > 0.0 ? config.sigma : config.model_sigma;

  if (config.prior.kind == PriorKind::kSparseAdditive) {
    const AdditiveFunction truth = experiment_additive_truth(config);
    std::vector<double> clean(design.size());
    for (std::size_t i = 0; i < design.size(); ++i) clean[i] = truth(design.point(i));
    const RegressionData data(design, simulate_responses(clean, config.sigma, noise), model_sigma);
    const AdditiveDraws draws =
        fit_sparse_additive(data, std::get<SparseAdditivePrior>(experiment_prior(config, n)), mcmc);
    std::vector<double> errors;
    for (const auto& f : draws.draws) errors.push_back(additive_l2_distance(f, truth));
    return errors;
  }

  const SeriesFunction truth = experiment_truth(config);
  const RegressionData data(design, simulate_responses(truth.evaluate(design.points()), config.sigma, noise),
                            model_sigma);
  const PriorSpec prior = experiment_prior(config, n);
  if (const auto* p = std::get_if<GaussianSplinePrior>(&prior)) {
    const GaussianPosterior post = fit_spline_conjugate(data, *p);
    const L2ErrorEvaluator error(truth, p->basis(), static_cast<std::size_t>(p->dimension()));
    std::vector<double> errors;
    for (int d = 0; d < config.posterior_draws; ++d) {
      const Eigen::VectorXd beta = post.sample(post_rng);
      errors.push_back(error(std::span<const double>(beta.data(), static_cast<std::size_t>(beta.size()))));
    }
    return errors;
  }
  if (const auto* p = std::get_if<SEGPPrior>(&prior)) {
    const auto grid = midpoint_nodes(p->grid_size);
    const GpPosterior post = fit_gp(data, *p, grid);
    const auto truth_values = truth.evaluate(grid);
    std::vector<double> errors;
    for (int d = 0; d < config.posterior_draws; ++d) {
      const auto f = post.sample(post_rng);
      double ss = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) ss += (f[i] - truth_values[i]) * (f[i] - truth_values[i]);
      errors.push_back(std::sqrt(ss / static_cast<double>(grid.size())));
    }
    return errors;
  }
  if (const auto* p = std::get_if<BlockPriorFourier>(&prior))
    return series_errors(fit_block_gibbs(data, *p, mcmc).draws, truth);
  if (const auto* p = std::get_if<BlockPriorWavelet>(&prior))
    return series_errors(fit_block_gibbs(data, *p, mcmc).draws, truth);
  return series_errors(
      fit_random_series_rjmcmc(data, std::get<FiniteRandomSeriesPrior>(prior), mcmc).draws, truth);
}

RateTable run_contraction_study(const ExperimentConfig& config, int threads) {
  config.validate();
  const std::size_t reps = static_cast<std::size_t>(config.replications);
  RateTable table;
  table.rows.resize(config.n_grid.size() * reps);
  parallel_for(table.rows.size(), threads, [&](std::size_t cell) {
    const int n = config.n_grid[cell / reps];
    const int r = static_cast<int>(cell % reps);
    std::vector<double> errors;
    try {
      errors = contraction_cell(config, n, r);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " [n = " << n << ", replication = " << r << ", master seed = " << config.seed
          << "]";
      throw SamplerError(msg.str());
    }
    RateRow row{n, r, mean(errors), quantile(errors, 0.5), quantile(errors, 0.9)};
    if (!std::isfinite(row.err_mean) || row.err_mean < 0.0)
      throw NumericalError("non-finite posterior error");
    table.rows[cell] = row;
  });
  return table;
}

RateFit fit_rate_slope(const RateTable& table, ErrorStatistic statistic) {
  std::map<int, std::vector<double>> by_n;
  for (const auto& row : table.rows) {
    const double v = statistic == ErrorStatistic::kMean  ? row.err_mean
                     : statistic == ErrorStatistic::kQ50 ? row.err_q50
                                                         : row.err_q90;
    by_n[row.n].push_back(v);
  }
  if (by_n.size() < 3) throw DomainError("rate fit needs at least 3 distinct n values");
  std::vector<double> x;
  std::vector<double> y;
  RateFit fit;
  for (const auto& [n, values] : by_n) {
    const double m = mean(values);
    if (!(m > 0.0)) throw DomainError("rate fit needs positive errors");
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(std::log(m));
    fit.n_values.push_back(n);
  }
  const LinearFit line = least_squares_line(x, y);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.slope_stderr = line.slope_stderr;
  fit.r_squared = line.r_squared;
  return fit;
}

std::string rate_table_csv(const RateTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "n,replication,err_mean,err_q50,err_q90\n";
  for (const auto& r : table.rows)
    out << r.n << ',' << r.replication << ',' << r.err_mean << ',' << r.err_q50 << ','
        << r.err_q90 << '\n';
  return out.str();
}

std::string rate_fit_json(const RateFit& fit) {
  const nlohmann::json j{{"slope", fit.slope},
                         {"stderr", fit.slope_stderr},
                         {"intercept", fit.intercept},
                         {"r2", fit.r_squared},
                         {"n_values", fit.n_values}};
  return j.dump(2) + "\n";
}

}  // namespace bnpreg
