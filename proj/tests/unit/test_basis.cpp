#include <cmath>
#include <numbers>

#include <doctest.h>

#include "bnpreg/basis.hpp"
#include "bnpreg/errors.hpp"
#include "bnpreg/funcspace.hpp"
#include "bnpreg/numerics.hpp"
#include "test_support.hpp"

using namespace bnpreg;
using testsupport::for_all;
using testsupport::random_int;
using testsupport::random_vector;

namespace {
constexpr auto kHalf = FourierConvention::kHalfPeriod;
}

TEST_CASE("fourier values") {
  CHECK(eval_fourier(1, 0.37) == 1.0);
  CHECK(eval_fourier(1, 0.37, kHalf) == 1.0);
  // Half-period sine and cosine: sqrt(2) sin(pi/4) and sqrt(2) cos(0).
  CHECK(eval_fourier(2, 0.25, kHalf) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_fourier(3, 0.0, kHalf) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
  CHECK(eval_fourier(3, 0.0) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
  CHECK(eval_fourier(2, 0.125) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_fourier(0, 0.5), DomainError);
  CHECK_THROWS_AS(eval_fourier(1, 1.5), DomainError);
  CHECK_THROWS_AS(eval_fourier(2, -0.1), DomainError);
}

TEST_CASE("fourier integrals match quadrature") {
  CHECK(fourier_integral(1) == 1.0);
  CHECK(fourier_integral(3, kHalf) == 0.0);
  CHECK(fourier_integral(2, kHalf) == doctest::Approx(2.0 * std::numbers::sqrt2 / std::numbers::pi).epsilon(1e-15));
  CHECK(fourier_integral(2, kHalf) == doctest::Approx(0.90031632).epsilon(1e-8));
  for (auto conv : {FourierConvention::kOrthonormal, kHalf}) {
    for (int k = 1; k <= 12; ++k) {
      const double quad = integrate_adaptive([&](double x) { return eval_fourier(k, x, conv); }, 0.0, 1.0);
      CHECK(fourier_integral(k, conv) == doctest::Approx(quad).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("haar values and domain") {
  CHECK(eval_haar(0, 0, 0.25) == 1.0);
  CHECK(eval_haar(0, 0, 0.75) == -1.0);
  CHECK(eval_haar(1, 1, 0.6) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
  CHECK(eval_haar(1, 0, 0.6) == 0.0);
  CHECK_THROWS_AS(eval_haar(1, 2, 0.5), DomainError);
  CHECK_THROWS_AS(eval_haar(2, -1, 0.5), DomainError);
  const HaarWaveletBasis haar(3);
  CHECK(haar.size() == 16);
  CHECK(haar(0, 0.3) == 1.0);
  CHECK(HaarWaveletBasis::flat_index(2, 3) == 7);
}

TEST_CASE("haar wavelets integrate to zero with +-2^{j/2} values on their support") {
  for (int j = 0; j <= 5; ++j)
    for (int k = 0; k < (1 << j); ++k) {
      const double integral = integrate_midpoint([&](double x) { return eval_haar(j, k, x); }, 4096);
      CHECK(std::abs(integral) < 1e-12);
      const double mid_left = (k + 0.25) / (1 << j);
      const double outside = k > 0 ? (k - 0.5) / (1 << j) : (k + 1.5) / (1 << j);
      CHECK(eval_haar(j, k, mid_left) == doctest::Approx(std::pow(2.0, j / 2.0)).epsilon(1e-14));
      if (outside <= 1.0) CHECK(eval_haar(j, k, outside) == 0.0);
    }
}

TEST_CASE("bspline examples") {
  const BSplineBasis step(1, 2);
  CHECK(eval_bspline(step, 1, 0.25) == 1.0);
  CHECK(eval_bspline(step, 2, 0.25) == 0.0);
  const BSplineBasis hat(2, 2);
  CHECK(hat.dimension() == 3);
  CHECK(eval_bspline(hat, 2, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_bspline(hat, 1, 0.25) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval_bspline(hat, 3, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_bspline(hat, 0, 0.5), DomainError);
  CHECK_THROWS_AS(eval_bspline(hat, 2, 1.2), DomainError);
  CHECK(BSplineBasis(4, 7).dimension() == 10);
}

TEST_CASE("property: bspline partition of unity, nonnegativity and local support") {
  for_all(200, 11, [](Rng& rng, int) {
    const int q = random_int(rng, 1, 6);
    const int k = random_int(rng, 1, 12);
    // Random strictly increasing breakpoints.
    std::vector<double> cuts(static_cast<std::size_t>(k - 1));
    for (double& c : cuts) c = uniform01(rng);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> bp{0.0};
    for (double c : cuts)
      if (c > bp.back() + 1e-6 && c < 1.0 - 1e-6) bp.push_back(c);
    bp.push_back(1.0);
    const BSplineBasis basis(q, bp);
    std::vector<double> values(static_cast<std::size_t>(basis.dimension()));
    for (int t = 0; t < 20; ++t) {
      const double x = t == 0 ? 0.0 : (t == 1 ? 1.0 : uniform01(rng));
      basis.evaluate_all(x, values);
      double sum = 0.0;
      int nonzero = 0;
      for (double v : values) {
        CHECK(v >= -1e-15);
        sum += v;
        nonzero += v != 0.0;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(nonzero <= q);
    }
  });
}

TEST_CASE("bspline integrals match quadrature") {
  const BSplineBasis basis(3, std::vector<double>{0.0, 0.1, 0.45, 0.5, 1.0});
  for (int k = 1; k <= basis.dimension(); ++k) {
    const double quad = integrate_adaptive([&](double x) { return basis(k, x); }, 0.0, 1.0, 1e-12);
    CHECK(basis.integral(k) == doctest::Approx(quad).epsilon(1e-9));
  }
}

TEST_CASE("orthonormality checks") {
  CHECK(orthonormality_check(FourierBasis{}, 10, 4096) <= 1e-8);
  CHECK(orthonormality_check(FourierBasis{}, 1, 16) == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  CHECK(orthonormality_check(HaarWaveletBasis(3), 16, 4096) <= 1e-12);
  CHECK_THROWS_AS(orthonormality_check(FourierBasis{}, 10, 39), DomainError);
  // The literal half-period system is not orthogonal: <psi_1, psi_2> = 2 sqrt 2 / pi.
  CHECK(orthonormality_check(FourierBasis(kHalf), 2, 4096) ==
        doctest::Approx(2.0 * std::numbers::sqrt2 / std::numbers::pi).epsilon(1e-6));
}

TEST_CASE("property: Parseval for Fourier and Haar expansions") {
  for_all(40, 12, [](Rng& rng, int c) {
    const bool haar = c % 2 == 1;
    const Basis basis = haar ? Basis(HaarWaveletBasis(4)) : Basis(FourierBasis{});
    const std::size_t size = haar ? 32 : static_cast<std::size_t>(random_int(rng, 1, 30));
    const SeriesFunction f(basis, random_vector(rng, size));
    double ss = 0.0;
    for (double b : f.coefficients()) ss += b * b;
    const auto nodes = midpoint_nodes(8192);
    double quad = 0.0;
    for (double v : f.evaluate(nodes)) quad += v * v;
    CHECK(std::sqrt(quad / 8192) == doctest::Approx(std::sqrt(ss)).epsilon(1e-6));
  });
}

TEST_CASE("property: bspline norm equivalence constants stay bounded in m") {
  // max|b| / ||sum b B||_inf and |b|_2 / (sqrt(m) ||sum b B||_2) within [1/10, 10].
  for_all(30, 13, [](Rng& rng, int) {
    for (int m : {4, 8, 16, 32, 64}) {
      const BSplineBasis basis(4, m - 3);
      const SeriesFunction f(basis, random_vector(rng, static_cast<std::size_t>(m)));
      double max_b = 0.0;
      double ss = 0.0;
      for (double b : f.coefficients()) {
        max_b = std::max(max_b, std::abs(b));
        ss += b * b;
      }
      const double r1 = max_b / sup_norm(f);
      const double r2 = std::sqrt(ss) / (std::sqrt(static_cast<double>(m)) * l2_norm(f));
      CHECK(r1 >= 0.1);
      CHECK(r1 <= 10.0);
      CHECK(r2 >= 0.1);
      CHECK(r2 <= 10.0);
    }
  });
}

TEST_CASE("bspline best approximation error decays like m^{-alpha}") {
  // f0(x) = |x - 0.3|^{1.5} has smoothness 1.5; quasi-interpolate by L2
  // projection and check m^{1.5} * sup error stays bounded and does not grow.
  auto f0 = [](double x) { return std::pow(std::abs(x - 0.3), 1.5); };
  const auto nodes = midpoint_nodes(8192);
  std::vector<double> target(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) target[i] = f0(nodes[i]);
  std::vector<double> scaled;
  for (int m : {8, 16, 32, 64}) {
    const BSplineBasis basis(4, m - 3);
    const Eigen::MatrixXd b = design_matrix(basis, nodes, static_cast<std::size_t>(m));
    const Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(target.size()));
    const Eigen::VectorXd beta = b.colPivHouseholderQr().solve(y);
    const SeriesFunction fit(basis, std::vector<double>(beta.data(), beta.data() + m));
    double err = 0.0;
    for (int t = 0; t <= 4000; ++t) err = std::max(err, std::abs(fit(t / 4000.0) - f0(t / 4000.0)));
    scaled.push_back(err * std::pow(m, 1.5));
  }
  for (double s : scaled) CHECK(s < 1.0);
  CHECK(scaled.back() <= 1.5 * scaled.front());
}
