#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "bnpreg/errors.hpp"
#include "bnpreg/funcspace.hpp"
#include "bnpreg/numerics.hpp"
#include "bnpreg/rng.hpp"
#include "bnpreg/stats.hpp"
#include "test_support.hpp"

using namespace bnpreg;
using testsupport::random_vector;

namespace {

const Basis kFourier = FourierBasis{};

double quadrature_distance(const SeriesFunction& f, const SeriesFunction& g) {
  const double sq = integrate_adaptive(
      [&](double x) {
        const double d = f(x) - g(x);
        return d * d;
      },
      0.0, 1.0, 1e-12);
  return std::sqrt(sq);
}

}  // namespace

TEST_CASE("l2 distance examples") {
  const SeriesFunction f(kFourier, {3.0, 4.0});
  CHECK(l2_distance(f, SeriesFunction::zero(kFourier, 2)) == 5.0);
  CHECK(l2_distance(f, f) == 0.0);
  // Parseval handles different lengths by zero padding.
  CHECK(l2_distance(SeriesFunction(kFourier, {1.0}), SeriesFunction(kFourier, {1.0, 0.0, 2.0})) == 2.0);

  const Basis spline = BSplineBasis(2, 4);
  const SeriesFunction hat(spline, {0.0, 1.0, -0.5, 2.0, 0.25});
  const SeriesFunction other(spline, {1.0, 0.0, 0.0, 0.0, 0.0});
  CHECK(l2_distance(hat, other) == doctest::Approx(quadrature_distance(hat, other)).epsilon(1e-6));

  // Half-period expansions are not orthogonal; the distance must come from quadrature.
  const Basis half = FourierBasis(FourierConvention::kHalfPeriod);
  const SeriesFunction h(half, {1.0, 1.0});
  const SeriesFunction z = SeriesFunction::zero(half, 1);
  CHECK(l2_distance(h, z) == doctest::Approx(quadrature_distance(h, z)).epsilon(1e-6));
  CHECK(std::abs(l2_distance(h, z) - std::sqrt(2.0)) > 0.1);

  // Mixed bases fall back to quadrature as well.
  const SeriesFunction one_haar(HaarWaveletBasis(1), {1.0});
  const SeriesFunction one_fourier(kFourier, {1.0});
  CHECK(l2_distance(one_haar, one_fourier) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("sup norm examples") {
  CHECK(sup_norm(SeriesFunction(kFourier, {1.0}), 256) == doctest::Approx(1.0));
  CHECK(sup_norm(SeriesFunction(kFourier, {0.0, 1.0})) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  CHECK(sup_norm(SeriesFunction(FourierBasis(FourierConvention::kHalfPeriod), {0.0, 1.0})) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  CHECK(sup_norm(SeriesFunction::zero(kFourier, 3)) == 0.0);
  CHECK_THROWS_AS(sup_norm(SeriesFunction(kFourier, {1.0}), 255), DomainError);
}

TEST_CASE("empirical l2 examples") {
  const Design d = uniform_design(100, 1, 1);
  const SeriesFunction f(kFourier, {2.0, 0.3});
  const SeriesFunction g(kFourier, {1.0, 0.3});
  CHECK(empirical_l2(f, g, d) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(empirical_l2(f, f, d) == 0.0);
  // f - g = sqrt(2) sin(2 pi x): values at 0, 1/4, 1/2 are 0, sqrt 2, 0 -> RMS sqrt(2/3).
  const SeriesFunction s(kFourier, {0.0, 1.0});
  const SeriesFunction zero = SeriesFunction::zero(kFourier, 1);
  const std::vector<double> pts{0.0, 0.25, 0.5};
  CHECK(empirical_l2(s, zero, pts) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(empirical_l2(s, zero, std::vector<double>{}), DomainError);
}

TEST_CASE("ball norm examples") {
  CHECK(ball_norm(SeriesFunction(kFourier, {0.0, 1.0}), {BallKind::kHolder, 1.0, 3.0}) == 2.0);
  CHECK(ball_norm(SeriesFunction(kFourier, {1.0, 0.25, 1.0 / 9.0}), {BallKind::kSobolev, 1.0, 2.0}) ==
        doctest::Approx(49.0 / 36.0).epsilon(1e-14));
  for (BallKind kind : {BallKind::kHolder, BallKind::kSobolev, BallKind::kAnalytic})
    CHECK(ball_norm(SeriesFunction::zero(kFourier, 5), {kind, 1.0, 1.0}) == 0.0);
  CHECK(ball_norm(SeriesFunction(kFourier, {0.5, 0.1}), {BallKind::kAnalytic, 2.0, 1.0}) ==
        doctest::Approx(0.25 * std::exp(0.5) + 0.01 * std::exp(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(ball_norm(SeriesFunction(HaarWaveletBasis(1), {1.0}), SmoothnessBall{}),
                  UnsupportedError);
}

TEST_CASE("make_truth calibration") {
  const SeriesFunction one = make_truth({BallKind::kHolder, 1.0, 2.0}, 5, 1);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one.coefficients()[0]) == doctest::Approx(1.8).epsilon(1e-10));
  CHECK(ball_norm(one, {BallKind::kHolder, 1.0, 2.0}) == doctest::Approx(1.8).epsilon(1e-10));

  const SmoothnessBall sob{BallKind::kSobolev, 1.0, 1.0};
  const double norm = ball_norm(make_truth(sob, 9, 50), sob);
  CHECK(norm >= 0.899);
  CHECK(norm <= 0.901);

  CHECK(make_truth(sob, 3, 20) == make_truth(sob, 3, 20));
  CHECK_FALSE(make_truth(sob, 3, 20) == make_truth(sob, 4, 20));
  CHECK_THROWS_AS(make_truth(sob, 1, 0), DomainError);
}

TEST_CASE("property: make_truth stays inside 0.9 of the ball") {
  testsupport::for_all(60, 77, [](Rng& gen, int) {
    const auto kind = static_cast<BallKind>(testsupport::random_int(gen, 0, 2));
    const SmoothnessBall ball{kind, 0.3 + 3.0 * uniform01(gen), 0.1 + 5.0 * uniform01(gen)};
    const SeriesFunction f = make_truth(ball, gen(), testsupport::random_int(gen, 1, 80));
    CHECK(ball_norm(f, ball) <= 0.9 * ball_bound(ball));
    CHECK(in_ball(f, ball));
  });
}

TEST_CASE("property: triangle inequality") {
  Rng rng(11);
  const std::vector<Basis> bases{kFourier, HaarWaveletBasis(3), BSplineBasis(3, 5)};
  for (int trial = 0; trial < 60; ++trial) {
    const Basis& b = bases[trial % bases.size()];
    const std::size_t m = std::min<std::size_t>(basis_capacity(b), 7);
    const SeriesFunction f(b, random_vector(rng, m));
    const SeriesFunction g(b, random_vector(rng, m));
    const SeriesFunction h(b, random_vector(rng, m));
    CHECK(l2_distance(f, h) <= l2_distance(f, g) + l2_distance(g, h) + 1e-9);
  }
}

TEST_CASE("property: empirical l2 converges to the integrated distance") {
  const SeriesFunction f(kFourier, {0.3, 1.0, -0.5, 0.25});
  const SeriesFunction g(kFourier, {0.0, 0.2, 0.1});
  const Design d = uniform_design(100000, 1, 2718);
  // Squared empirical distance is a Monte Carlo mean of (f - g)^2.
  std::vector<double> sq;
  for (double x : d.points()) sq.push_back(std::pow(f(x) - g(x), 2));
  const double se = std::sqrt(sample_variance(sq) / sq.size());
  const double emp = empirical_l2(f, g, d);
  const double exact = l2_distance(f, g);
  CHECK(std::abs(emp * emp - exact * exact) < 5.0 * se);
}

TEST_CASE("property: sup norm squared is at most 2m times l2 squared") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = testsupport::random_int(rng, 1, 30);
    const SeriesFunction f(kFourier, random_vector(rng, m));
    const double sup = sup_norm(f);
    const double l2 = l2_norm(f);
    CHECK(sup * sup <= 2.0 * m * l2 * l2 * (1.0 + 1e-12));
    CHECK(sieve_condition_check(f, SeriesFunction::zero(kFourier, 1), SieveSpec(m, 0.0, 2.0)));
  }
}

TEST_CASE("sieve condition examples") {
  const SeriesFunction f(kFourier, {0.4, -1.0, 2.0});
  CHECK(sieve_condition_check(f, f, SieveSpec(1, 0.1, 1.0)));
  const SeriesFunction c(kFourier, {1.7});
  CHECK(sieve_condition_check(c, SeriesFunction::zero(kFourier, 1), SieveSpec(1, 0.0, 1.0)));
  // A spiky difference violates the m = 1 condition with eta = 1.
  std::vector<double> spiky(40, 1.0);
  CHECK_FALSE(sieve_condition_check(SeriesFunction(kFourier, spiky), SeriesFunction::zero(kFourier, 1),
                                    SieveSpec(1, 0.0, 1.0)));
}

TEST_CASE("l2 error evaluator matches l2_distance") {
  Rng rng(21);
  const SeriesFunction truth = make_truth({BallKind::kHolder, 1.0, 1.0}, 4, 30);
  const std::vector<Basis> bases{kFourier, BSplineBasis(4, 6), HaarWaveletBasis(3)};
  for (const auto& b : bases) {
    const std::size_t m = std::min<std::size_t>(basis_capacity(b), 9);
    const L2ErrorEvaluator eval(truth, b, m);
    for (int i = 0; i < 5; ++i) {
      const SeriesFunction f(b, random_vector(rng, m));
      CHECK(eval(f) == doctest::Approx(l2_distance(f, truth)).epsilon(1e-9));
    }
  }
}

TEST_CASE("additive distance") {
  const SeriesFunction f1(kFourier, {0.0, 1.0});
  const SeriesFunction f2(kFourier, {0.0, 0.0, 2.0});
  const SeriesFunction empty(kFourier, {});
  const AdditiveFunction f{1.0, {f1, f2}, {1, 1}};
  const AdditiveFunction g{0.0, {f1, empty}, {1, 0}};
  // Centered components are orthogonal to constants and to each other.
  CHECK(additive_l2_distance(f, g) == doctest::Approx(std::sqrt(1.0 + 4.0)).epsilon(1e-10));
  CHECK(additive_l2_distance(f, f) == 0.0);
  CHECK(f.active_count() == 2);
  const std::vector<double> x{0.25, 0.0};
  CHECK(f(x) == doctest::Approx(1.0 + std::sqrt(2.0) + 2.0 * std::sqrt(2.0)));
}
