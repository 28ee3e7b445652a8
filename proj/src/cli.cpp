#include "bnpreg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "bnpreg/config.hpp"
#include "bnpreg/errors.hpp"
#include "bnpreg/harness.hpp"
#include "bnpreg/numerics.hpp"
#include "bnpreg/priors.hpp"
#include "bnpreg/serialization.hpp"
#include "bnpreg/testing.hpp"

namespace bnpreg {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int threads = 1;
};

KeyValueConfig load_config(const Options& opt, bool required) {
  if (opt.config.empty()) {
    if (required) throw ConfigError("missing --config <path>");
    return KeyValueConfig::parse("", "<defaults>");
  }
  KeyValueConfig kv = KeyValueConfig::load(opt.config);
  if (opt.seed) kv.set("seed", std::to_string(*opt.seed));
  return kv;
}

void reject_unknown(const KeyValueConfig& kv, std::initializer_list<const char*> prefixes) {
  for (const auto& key : kv.unused_keys()) {
    const bool known = std::any_of(prefixes.begin(), prefixes.end(), [&](const char* p) {
      return key.rfind(p, 0) == 0;
    });
    if (!known) throw ConfigError(kv.source() + ": unknown key '" + key + "'");
  }
}

fs::path write_file(const Options& opt, const std::string& name, const std::string& content) {
  fs::create_directories(opt.out_dir);
  const fs::path path = fs::path(opt.out_dir) / name;
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path.string() + "'");
  file << content;
  return path;
}

json grid_json(std::span<const double> grid, std::span<const double> values) {
  return {{"grid", std::vector<double>(grid.begin(), grid.end())},
          {"values", std::vector<double>(values.begin(), values.end())}};
}

int cmd_sample_prior(const Options& opt, std::ostream& out) {
  const KeyValueConfig kv = load_config(opt, true);
  const int count = kv.get_int("sample.count", 10);
  const ExperimentConfig c = experiment_from_config(kv);
  if (count < 1) throw ConfigError("sample.count must be >= 1");
  const PriorSpec prior = experiment_prior(c, c.n_grid.back());
  std::string lines;
  for (int i = 0; i < count; ++i) {
    const PriorDraw draw = sample_prior(prior, derive_seed(c.seed, static_cast<std::uint64_t>(i)));
    json j = std::visit(
        [](const auto& d) -> json {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, GridFunction>) return grid_json(d.grid, d.values);
          else return to_json(d);
        },
        draw);
    lines += j.dump() + "\n";
  }
  out << "wrote " << write_file(opt, "prior_draws.jsonl", lines).string() << "\n";
  return 0;
}

int cmd_fit(const Options& opt, std::ostream& out) {
  const KeyValueConfig kv = load_config(opt, true);
  const int n_override = kv.get_int("fit.n", 0);
  const ExperimentConfig c = experiment_from_config(kv);
  const int n = n_override > 0 ? n_override : c.n_grid.back();
  Rng data_rng(derive_seed(c.seed, 0xf17));
  const double model_sigma = c.sigma > 0.0 ? c.sigma : c.model_sigma;
  McmcConfig mcmc = c.mcmc;
  mcmc.seed = derive_seed(c.seed, 0xf17, 1);
  Rng post_rng(derive_seed(c.seed, 0xf17, 2));
  std::string lines;
  json summary{{"n", n}, {"prior", to_string(c.prior.kind)}, {"seed", c.seed}};
  auto record = [&](const SamplerDiagnostics& d) {
    summary["acceptance"] = d.acceptance;
    summary["ess"] = d.ess;
    summary["kept"] = d.kept;
    summary["truncation_mass"] = d.truncation_mass;
  };

  if (c.prior.kind == PriorKind::kSparseAdditive) {
    const Design design = uniform_design(static_cast<std::size_t>(n), static_cast<std::size_t>(c.prior.p),
                                         derive_seed(c.seed, 0xf17, 3));
    const AdditiveFunction truth = experiment_additive_truth(c);
    std::vector<double> clean(design.size());
    for (std::size_t i = 0; i < design.size(); ++i) clean[i] = truth(design.point(i));
    const RegressionData data(design, simulate_responses(clean, c.sigma, data_rng), model_sigma);
    const auto draws = fit_sparse_additive(data, std::get<SparseAdditivePrior>(experiment_prior(c, n)), mcmc);
    for (const auto& f : draws.draws) lines += to_json(f).dump() + "\n";
    record(draws.diagnostics);
  } else {
    const Design design = c.design == DesignKind::kEquidistant
                              ? equidistant_design(static_cast<std::size_t>(n))
                              : uniform_design(static_cast<std::size_t>(n), 1, derive_seed(c.seed, 0xf17, 3));
    const SeriesFunction truth = experiment_truth(c);
    const RegressionData data(design, simulate_responses(truth.evaluate(design.points()), c.sigma, data_rng),
                              model_sigma);
    const PriorSpec prior = experiment_prior(c, n);
    PosteriorDraws draws;
    if (const auto* p = std::get_if<GaussianSplinePrior>(&prior)) {
      const GaussianPosterior post = fit_spline_conjugate(data, *p);
      for (int d = 0; d < c.posterior_draws; ++d) {
        const Eigen::VectorXd beta = post.sample(post_rng);
        draws.draws.emplace_back(p->basis(), std::vector<double>(beta.data(), beta.data() + beta.size()));
      }
    } else if (const auto* p = std::get_if<SEGPPrior>(&prior)) {
      const auto grid = midpoint_nodes(p->grid_size);
      const GpPosterior post = fit_gp(data, *p, grid);
      for (int d = 0; d < c.posterior_draws; ++d) lines += grid_json(grid, post.sample(post_rng)).dump() + "\n";
    } else if (const auto* p = std::get_if<BlockPriorFourier>(&prior)) {
      draws = fit_block_gibbs(data, *p, mcmc);
    } else if (const auto* p = std::get_if<BlockPriorWavelet>(&prior)) {
      draws = fit_block_gibbs(data, *p, mcmc);
    } else {
      draws = fit_random_series_rjmcmc(data, std::get<FiniteRandomSeriesPrior>(prior), mcmc);
    }
    lines += draws_to_jsonl(draws);
    if (!draws.draws.empty() && c.prior.kind != PriorKind::kSpline) record(draws.diagnostics);
    summary["truth"] = to_json(truth);
  }
  out << "wrote " << write_file(opt, "draws.jsonl", lines).string() << "\n";
  write_file(opt, "fit_summary.json", summary.dump(2) + "\n");
  return 0;
}

int cmd_contract(const Options& opt, std::ostream& out) {
  const KeyValueConfig kv = load_config(opt, true);
  const ExperimentConfig c = experiment_from_config(kv);
  const RateTable table = run_contraction_study(c, opt.threads);
  const RateFit fit = fit_rate_slope(table);
  out << "wrote " << write_file(opt, "rate_table.csv", rate_table_csv(table)).string() << "\n";
  out << "wrote " << write_file(opt, "rate_fit.json", rate_fit_json(fit)).string() << "\n";
  out << "slope " << fit.slope << " (stderr " << fit.slope_stderr << ")\n";
  return 0;
}

int cmd_test_power(const Options& opt, std::ostream& out) {
  const KeyValueConfig kv = load_config(opt, true);
  TestConfig tc;
  tc.seed = kv.get_uint64("seed", tc.seed);
  tc.threads = opt.threads;
  tc.replications = kv.get_int("test.replications", tc.replications);
  tc.xi = kv.get_double("test.xi", tc.xi);
  tc.sigma = kv.get_double("test.sigma", tc.sigma);
  tc.design = design_kind_from_string(kv.get_string("test.design", "random-uniform"));
  const std::vector<int> ns = kv.has("test.n") ? kv.get_int_list("test.n") : std::vector<int>{50, 100, 200, 400};
  const SeriesFunction f0(FourierBasis{}, kv.has("test.f0") ? kv.get_double_list("test.f0") : std::vector<double>{});
  const SeriesFunction f1(FourierBasis{}, kv.has("test.f1") ? kv.get_double_list("test.f1")
                                                            : std::vector<double>{0.0, 0.2});
  const SeriesFunction f(FourierBasis{}, kv.has("test.f") ? kv.get_double_list("test.f")
                                                          : std::vector<double>(f1.coefficients().begin(),
                                                                                f1.coefficients().end()));
  reject_unknown(kv, {});
  std::vector<ErrorEstimate> rows;
  for (int n : ns) rows.push_back(mc_type1_error(f0, f1, n, tc));
  for (int n : ns) rows.push_back(mc_type2_error(f, f0, f1, n, tc));
  out << "wrote " << write_file(opt, "test_power.csv", estimates_to_csv(rows)).string() << "\n";
  return 0;
}

int cmd_check_conditions(const Options& opt, std::ostream& out) {
  const KeyValueConfig kv = load_config(opt, false);
  const int max_level = kv.get_int("check.max_level", 6);
  const int wavelet_levels = kv.get_int("check.wavelet_levels", 8);
  const std::vector<int> disc_n = kv.has("check.discrepancy_n") ? kv.get_int_list("check.discrepancy_n")
                                                                 : std::vector<int>{1, 2, 10, 1000, 100000};
  kv.get_uint64("seed", 0);
  reject_unknown(kv, {});

  json report;
  const BlockPriorFourier prior = BlockPriorFourier::standard(max_level);
  const BlockConstants fitted = fit_block_constants(prior);
  json levels = json::array();
  bool all = true;
  for (const auto& r : verify_block_conditions(prior, fitted.c1, fitted.c2, fitted.c3)) {
    levels.push_back({{"level", r.level},
                      {"lower_bound", r.lower_bound},
                      {"first_moment", r.first_moment},
                      {"tail", r.tail},
                      {"log_min_density", r.log_min_density},
                      {"log_first_moment", r.log_first_moment},
                      {"log_tail", std::isfinite(r.log_tail) ? json(r.log_tail) : json(nullptr)}});
    all = all && r.all();
  }
  report["block_conditions"] = {{"c1", fitted.c1}, {"c2", fitted.c2}, {"c3", fitted.c3},
                                {"levels", levels}, {"pass", all}};
  json wavelet = json::array();
  for (int j = 0; j <= wavelet_levels; ++j)
    wavelet.push_back({{"j", j},
                       {"unnormalized_mass", std::exp(wavelet_gj_unnormalized(j).log_mass())},
                       {"closed_form_mass", wavelet_gj_unnormalized_mass(j)}});
  report["wavelet_masses"] = wavelet;
  report["orthonormality"] = {{"fourier_10", orthonormality_check(FourierBasis{}, 10)},
                              {"haar_J3", orthonormality_check(HaarWaveletBasis(3), 16)}};
  json disc = json::array();
  for (int n : disc_n) {
    const double d = discrepancy(equidistant_design(static_cast<std::size_t>(n)));
    disc.push_back({{"n", n}, {"discrepancy", d}, {"n_times_discrepancy", n * d}});
  }
  report["discrepancy"] = disc;
  out << "block conditions " << (all ? "pass" : "FAIL") << " (c1 = " << fitted.c1
      << ", c2 = " << fitted.c2 << ", c3 = " << fitted.c3 << ")\n";
  out << "wrote " << write_file(opt, "conditions.json", report.dump(2) + "\n").string() << "\n";
  return all ? 0 : 1;
}

}  // namespace

int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian nonparametric regression: priors, posterior sampling and contraction studies",
               "bnpreg"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "key = value experiment file");
    sub->add_option("--seed", opt.seed, "override the master seed");
    sub->add_option("--out-dir", opt.out_dir, "directory for output files");
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
  };
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&, std::ostream&);
  };
  const Command commands[] = {
      {"sample-prior", "write prior draws as JSON lines", cmd_sample_prior},
      {"fit", "fit one simulated dataset and write posterior draws", cmd_fit},
      {"contract", "run a contraction study: rate_table.csv and rate_fit.json", cmd_contract},
      {"test-power", "Monte Carlo type I/II errors of the T_n test", cmd_test_power},
      {"check-conditions", "block-prior conditions, orthonormality and discrepancy report",
       cmd_check_conditions},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    subs.push_back(app.add_subcommand(c.name, c.help));
    add_common(subs.back());
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << "\n" << app.help();
    return 2;
  }
  try {
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) return commands[i].run(opt, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace bnpreg
