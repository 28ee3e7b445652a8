#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <doctest.h>

#include "bnpreg/errors.hpp"
#include "bnpreg/stats.hpp"
#include "bnpreg/testing.hpp"
#include "test_support.hpp"

using namespace bnpreg;

namespace {

const Basis kFourier = FourierBasis{};

RegressionData noiseless(const SeriesFunction& f, std::size_t n, std::uint64_t seed) {
  Design d = uniform_design(n, 1, seed);
  auto y = f.evaluate(d.points());
  return RegressionData(d, std::move(y), 1.0);
}

double penalty(const SeriesFunction& f0, const SeriesFunction& f1, const Design& d) {
  const double n = static_cast<double>(d.size());
  const double emp = empirical_l2(f1, f0, d);
  return std::sqrt(n) / (8.0 * std::numbers::sqrt2) * l2_distance(f1, f0) * std::sqrt(n * emp * emp);
}

}  // namespace

TEST_CASE("test statistic examples") {
  const SeriesFunction f0(kFourier, {0.2, 0.5});
  const SeriesFunction f1(kFourier, {0.2, 0.5, 0.3});
  const RegressionData any = noiseless(SeriesFunction(kFourier, {1.0, -2.0}), 40, 1);
  CHECK(test_statistic_tn(any, f0, f0) == 0.0);

  // y = f0: sum f0 d - (1/2) sum (f1^2 - f0^2) = -(1/2) sum d^2.
  const RegressionData at_null = noiseless(f0, 200, 2);
  const double n = 200.0;
  const double v = std::pow(empirical_l2(f1, f0, at_null.design), 2);
  const double t0 = test_statistic_tn(at_null, f0, f1);
  CHECK(t0 == doctest::Approx(-0.5 * n * v - penalty(f0, f1, at_null.design)).epsilon(1e-10));
  CHECK(t0 <= 0.0);

  // y = f1: T_n = n (v / 2 - ||d|| sqrt(v) / (8 sqrt 2)), positive once sqrt(v) > ||d|| / (4 sqrt 2).
  const RegressionData at_alt = noiseless(f1, 200, 3);
  const double v1 = std::pow(empirical_l2(f1, f0, at_alt.design), 2);
  REQUIRE(std::sqrt(v1) > l2_distance(f1, f0) / (4.0 * std::numbers::sqrt2));
  const double t1 = test_statistic_tn(at_alt, f0, f1);
  CHECK(t1 == doctest::Approx(0.5 * n * v1 - penalty(f0, f1, at_alt.design)).epsilon(1e-10));
  CHECK(t1 > 0.0);
}

TEST_CASE("property: statistic is invariant under a common shift") {
  testsupport::for_all(50, 5, [](Rng& rng, int) {
    const SeriesFunction f0(kFourier, testsupport::random_vector(rng, 4));
    const SeriesFunction f1(kFourier, testsupport::random_vector(rng, 6));
    const double c = 5.0 * standard_normal(rng);
    const Design d = uniform_design(testsupport::random_int(rng, 1, 100), 1, rng());
    std::vector<double> y = testsupport::random_vector(rng, d.size());
    std::vector<double> shifted = y;
    for (double& v : shifted) v += c;
    auto shift = [c](const SeriesFunction& f) {
      std::vector<double> b(f.coefficients().begin(), f.coefficients().end());
      b[0] += c;  // psi_1 is the constant function
      return SeriesFunction(f.basis(), b);
    };
    const double t = test_statistic_tn(RegressionData(d, y, 1.0), f0, f1);
    const double ts = test_statistic_tn(RegressionData(d, shifted, 1.0), shift(f0), shift(f1));
    CHECK(ts == doctest::Approx(t).epsilon(1e-10).scale(1.0));
  });
}

TEST_CASE("type I error decays across a doubling grid") {
  const SeriesFunction f0(kFourier, {0.0});
  const SeriesFunction f1(kFourier, {0.0, 0.15});
  TestConfig cfg;
  cfg.seed = 17;
  cfg.threads = 4;
  std::vector<double> logn, loge;
  std::vector<ErrorEstimate> rows;
  for (int n : {50, 100, 200, 400}) rows.push_back(mc_type1_error(f0, f1, n, cfg));
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    CHECK(rows[i + 1].estimate <= rows[i].estimate);
    // Geometric decay: the ratio stays below one even at the edge of the error bands.
    const double upper = rows[i + 1].estimate + 2.0 * rows[i + 1].std_error;
    const double lower = rows[i].estimate - 2.0 * rows[i].std_error;
    CHECK(upper / lower < 1.0);
  }
  for (const auto& r : rows) {
    REQUIRE(r.estimate > 0.0);
    logn.push_back(r.n);
    loge.push_back(std::log(r.estimate));
  }
  CHECK(least_squares_line(logn, loge).slope < 0.0);
  CHECK(rows[0].statistic == "type1");

  TestConfig serial = cfg;
  serial.threads = 1;
  CHECK(mc_type1_error(f0, f1, 50, serial).estimate == rows[0].estimate);
}

TEST_CASE("type II error at the alternative decays") {
  const SeriesFunction f0(kFourier, {0.0});
  const SeriesFunction f1(kFourier, {0.0, 0.15});
  TestConfig cfg;
  cfg.seed = 18;
  cfg.threads = 4;
  double previous = 1.0;
  for (int n : {50, 100, 200, 400}) {
    const ErrorEstimate e = mc_type2_error(f1, f0, f1, n, cfg);
    CHECK(e.estimate <= previous);
    previous = e.estimate;
  }
}

TEST_CASE("test preconditions") {
  const SeriesFunction f0(kFourier, {0.0});
  const SeriesFunction f1(kFourier, {0.0, 0.15});
  TestConfig cfg;
  cfg.replications = 100;
  CHECK_THROWS_AS(mc_type1_error(f0, f0, 100, cfg), ConfigError);
  CHECK_THROWS_AS(mc_type1_error(f0, f1, 40, cfg), ConfigError);  // sqrt(40) * 0.15 < 1

  const double radius = cfg.xi * 0.15;
  const SeriesFunction boundary(kFourier, {0.0, 0.15, radius});
  const ErrorEstimate e = mc_type2_error(boundary, f0, f1, 100, cfg);
  CHECK(std::isfinite(e.estimate));
  const SeriesFunction outside(kFourier, {0.0, 0.15, 1.01 * radius});
  CHECK_THROWS_AS(mc_type2_error(outside, f0, f1, 100, cfg), ConfigError);

  TestConfig bad;
  bad.xi = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("estimates csv") {
  const std::vector<ErrorEstimate> rows{{50, "type1", 0.25, 0.01, 100, 7}};
  const std::string csv = estimates_to_csv(rows);
  CHECK(csv.rfind("n,statistic,estimate,std_error,replications,seed\n", 0) == 0);
  CHECK(csv.find("50,type1,") != std::string::npos);
}

TEST_CASE("prior concentration examples") {
  const SeriesFunction origin(FourierBasis{}, {0.0});
  const GaussianSplinePrior scalar{1, 1};
  const SeriesFunction zero_spline(scalar.basis(), {0.0});

  ConcentrationSet everything{1, 1e6, 1e6, 1.0};
  CHECK(prior_concentration_mc(FiniteRandomSeriesPrior{}, origin, everything, 2000, 1).estimate == 1.0);

  const boost::math::normal standard;
  const int draws = 10000;
  double previous = 1.0;
  for (double eps : {1.0, 0.5, 0.2, 0.05}) {
    const ConcentrationEstimate c = prior_concentration_mc(scalar, zero_spline, {1, eps, 1.0, 1.0}, draws, 3, 4);
    const double exact = 2.0 * boost::math::cdf(standard, eps) - 1.0;
    CHECK(std::abs(c.estimate - exact) <= 3.0 * std::sqrt(exact * (1 - exact) / draws));
    CHECK(c.estimate <= previous);
    previous = c.estimate;
  }
  const ConcentrationEstimate none = prior_concentration_mc(scalar, zero_spline, {1, 1e-9, 1.0, 1.0}, 1000, 3);
  CHECK(none.hits == 0);
  CHECK(none.zero_hit_bound == doctest::Approx(3.0 / 1000));

  // The batched estimator agrees draw by draw with the direct membership test.
  const SeriesFunction f0(kFourier, {0.3, -0.2});
  const ConcentrationSet sieve{3, 1.0, 0.5, 1.5};
  for (const PriorSpec& spec : {PriorSpec{FiniteRandomSeriesPrior{}}, PriorSpec{GaussianSplinePrior{4, 3}}}) {
    int direct = 0;
    for (int i = 0; i < 200; ++i)
      direct += in_concentration_set(std::get<SeriesFunction>(sample_prior(spec, derive_seed(9, i))), f0, sieve);
    CHECK(prior_concentration_mc(spec, f0, sieve, 200, 9).hits == direct);
  }

  ConcentrationSet sup{1, 0.5, 1.0, 1.0, ConcentrationMode::kSup};
  CHECK(in_concentration_set(SeriesFunction(kFourier, {0.4}), origin, sup));
  CHECK_FALSE(in_concentration_set(SeriesFunction(kFourier, {0.0, 0.4}), origin, sup));
}
