#include "bnpreg/testing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bnpreg/errors.hpp"
#include "bnpreg/numerics.hpp"
#include "bnpreg/parallel.hpp"
#include "bnpreg/rng.hpp"

namespace bnpreg {

void TestConfig::validate() const {
  if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("test xi must lie in (0, 1)");
  if (replications < 1) throw ConfigError("test replications must be >= 1");
  if (!(sigma > 0.0)) throw ConfigError("test sigma must be positive");
}

double test_statistic_tn(std::span<const double> y, std::span<const double> f0_values,
                         std::span<const double> f1_values, double l2_gap) {
  const std::size_t n = y.size();
  if (n == 0) throw DomainError("test statistic needs a nonempty design");
  if (f0_values.size() != n || f1_values.size() != n)
    throw DomainError("test statistic: value vectors differ in length");
  double cross = 0.0;
  double squares = 0.0;  // n P_n (f1^2 - f0^2)
  double gap = 0.0;      // n P_n (f1 - f0)^2
  for (std::size_t i = 0; i < n; ++i) {
    const double d = f1_values[i] - f0_values[i];
    cross += y[i] * d;
    squares += f1_values[i] * f1_values[i] - f0_values[i] * f0_values[i];
    gap += d * d;
  }
  const double penalty =
      std::sqrt(static_cast<double>(n)) / (8.0 * std::numbers::sqrt2) * l2_gap * std::sqrt(gap);
  return cross - 0.5 * squares - penalty;
}

double test_statistic_tn(const RegressionData& data, const SeriesFunction& f0,
                         const SeriesFunction& f1) {
  if (data.design.dimension() != 1) throw UnsupportedError("test statistic needs a 1-D design");
  const auto x = data.design.points();
  return test_statistic_tn(data.responses, f0.evaluate(x), f1.evaluate(x), l2_distance(f0, f1));
}

namespace {

Design replication_design(const TestConfig& config, int n, std::uint64_t seed) {
  if (config.design == DesignKind::kEquidistant) return equidistant_design(static_cast<std::size_t>(n));
  return uniform_design(static_cast<std::size_t>(n), 1, seed);
}

// Fraction of replications with data from `truth` whose decision (T_n > 0)
// equals count_rejections.
ErrorEstimate run_error_mc(const SeriesFunction& truth, const SeriesFunction& f0,
                           const SeriesFunction& f1, int n, const TestConfig& config,
                           bool count_rejections, std::uint64_t stream, const char* name) {
  const double gap = l2_distance(f0, f1);
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(config.replications), 0);
  parallel_for(hit.size(), config.threads, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(config.seed, stream * 1000003ULL + static_cast<std::uint64_t>(n), r);
    const Design design = replication_design(config, n, seed);
    Rng rng(derive_seed(seed, 1));
    const auto x = design.points();
    std::vector<double> y = truth.evaluate(x);
    for (double& v : y) v += config.sigma * standard_normal(rng);
    const bool reject = test_statistic_tn(y, f0.evaluate(x), f1.evaluate(x), gap) > 0.0;
    hit[r] = reject == count_rejections ? 1 : 0;
  });
  std::size_t hits = 0;
  for (auto h : hit) hits += h;
  ErrorEstimate e;
  e.n = n;
  e.statistic = name;
  e.replications = config.replications;
  e.seed = config.seed;
  e.estimate = static_cast<double>(hits) / config.replications;
  e.std_error = std::sqrt(e.estimate * (1.0 - e.estimate) / config.replications);
  return e;
}

void require_separation(const SeriesFunction& f0, const SeriesFunction& f1, int n) {
  if (n < 1) throw DomainError("test error estimation needs n >= 1");
  const double gap = l2_distance(f0, f1);
  if (!(std::sqrt(static_cast<double>(n)) * gap > 1.0)) {
    std::ostringstream msg;
    msg << "error bounds for T_n need sqrt(n) * ||f1 - f0||_2 > 1; got sqrt(" << n << ") * "
        << gap << " = " << std::sqrt(static_cast<double>(n)) * gap;
    throw ConfigError(msg.str());
  }
}

}  // namespace

ErrorEstimate mc_type1_error(const SeriesFunction& f0, const SeriesFunction& f1, int n,
                             const TestConfig& config) {
  config.validate();
  require_separation(f0, f1, n);
  return run_error_mc(f0, f0, f1, n, config, true, 1, "type1");
}

ErrorEstimate mc_type2_error(const SeriesFunction& f, const SeriesFunction& f0,
                             const SeriesFunction& f1, int n, const TestConfig& config) {
  config.validate();
  require_separation(f0, f1, n);
  const double radius = config.xi * l2_distance(f0, f1);
  const double dist = l2_distance(f, f1);
  if (dist > radius * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "alternative lies outside the neighborhood ||f - f1||_2 <= xi ||f0 - f1||_2 (" << dist
        << " > " << radius << ")";
    throw ConfigError(msg.str());
  }
  return run_error_mc(f, f0, f1, n, config, false, 2, "type2");
}

std::string estimates_to_csv(std::span<const ErrorEstimate> rows) {
  std::ostringstream out;
  out.precision(17);
  out << "n,statistic,estimate,std_error,replications,seed\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.statistic << ',' << r.estimate << ',' << r.std_error << ','
        << r.replications << ',' << r.seed << '\n';
  return out.str();
}

namespace {

bool set_contains(double sup, double l2, const ConcentrationSet& set) {
  if (set.mode == ConcentrationMode::kSup) return sup < set.epsilon;
  return l2 < set.epsilon && sup * sup <= set.eta_prime * (set.k * l2 * l2 + set.omega * set.omega);
}

// Membership tests against one f0 with its grid values computed once.
// Matches sup_distance and l2_distance at their default resolutions.
class ConcentrationProbe {
 public:
  explicit ConcentrationProbe(const SeriesFunction& f0)
      : f0_(f0), sup_grid_(kDefaultQuadraturePanels), nodes_(midpoint_nodes(kDefaultQuadraturePanels)) {
    for (std::size_t i = 0; i < sup_grid_.size(); ++i)
      sup_grid_[i] = static_cast<double>(i) / static_cast<double>(sup_grid_.size() - 1);
    f0_grid_ = f0.evaluate(sup_grid_);
    f0_nodes_ = f0.evaluate(nodes_);
  }

  bool contains(const SeriesFunction& f, const ConcentrationSet& set) const {
    const auto fv = f.evaluate(sup_grid_);
    double sup = 0.0;
    for (std::size_t i = 0; i < fv.size(); ++i) sup = std::max(sup, std::abs(fv[i] - f0_grid_[i]));
    if (set.mode == ConcentrationMode::kSup) return set_contains(sup, 0.0, set);
    double l2 = 0.0;
    if (parseval_compatible(f.basis(), f0_.basis())) {
      l2 = l2_distance(f, f0_);
    } else {
      const auto nv = f.evaluate(nodes_);
      for (std::size_t i = 0; i < nv.size(); ++i) l2 += (nv[i] - f0_nodes_[i]) * (nv[i] - f0_nodes_[i]);
      l2 = std::sqrt(l2 / static_cast<double>(nodes_.size()));
    }
    return set_contains(sup, l2, set);
  }

 private:
  const SeriesFunction& f0_;
  std::vector<double> sup_grid_;
  std::vector<double> nodes_;
  std::vector<double> f0_grid_;
  std::vector<double> f0_nodes_;
};

}  // namespace

bool in_concentration_set(const SeriesFunction& f, const SeriesFunction& f0,
                          const ConcentrationSet& set) {
  const double sup = sup_distance(f, f0);
  if (set.mode == ConcentrationMode::kSup) return set_contains(sup, 0.0, set);
  return set_contains(sup, l2_distance(f, f0), set);
}

ConcentrationEstimate prior_concentration_mc(const PriorSpec& prior, const SeriesFunction& f0,
                                             const ConcentrationSet& set, int draws,
                                             std::uint64_t seed, int threads) {
  if (draws < 1) throw DomainError("concentration estimate needs draws >= 1");
  const ConcentrationProbe probe(f0);
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(draws), 0);
  parallel_for(hit.size(), threads, [&](std::size_t i) {
    const PriorDraw draw = sample_prior(prior, derive_seed(seed, i));
    const auto* f = std::get_if<SeriesFunction>(&draw);
    if (!f) throw UnsupportedError("prior concentration needs a prior with series draws");
    hit[i] = probe.contains(*f, set) ? 1 : 0;
  });
  ConcentrationEstimate e;
  e.draws = draws;
  for (auto h : hit) e.hits += h;
  e.estimate = static_cast<double>(e.hits) / draws;
  e.std_error = std::sqrt(e.estimate * (1.0 - e.estimate) / draws);
  if (e.hits == 0) e.zero_hit_bound = 3.0 / draws;
  return e;
}

}  // namespace bnpreg
