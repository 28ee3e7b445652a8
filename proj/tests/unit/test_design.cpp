#include <algorithm>
#include <cmath>
#include <limits>

#include <doctest.h>

#include "bnpreg/design.hpp"
#include "bnpreg/errors.hpp"
#include "bnpreg/stats.hpp"

using namespace bnpreg;

namespace {

// Brute-force sup over the two one-sided limits at every point.
double discrepancy_oracle(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double sup = 0.0;
  for (double t : x) {
    const auto below = std::lower_bound(x.begin(), x.end(), t) - x.begin();
    const auto at_or_below = std::upper_bound(x.begin(), x.end(), t) - x.begin();
    sup = std::max({sup, std::abs(at_or_below / n - t), std::abs(below / n - t)});
  }
  return std::max(sup, std::abs(1.0 - x.back()));
}

}  // namespace

TEST_CASE("uniform design moments, determinism and shape") {
  const std::size_t n = 100000;
  const Design d = uniform_design(n, 1, 42);
  const double m = mean(d.points());
  CHECK(std::abs(m - 0.5) < 3.0 * (1.0 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(n)));
  CHECK(uniform_design(500, 2, 7) == uniform_design(500, 2, 7));
  CHECK_FALSE(uniform_design(500, 2, 7) == uniform_design(500, 2, 8));
  const Design cube = uniform_design(1, 3, 3);
  CHECK(cube.size() == 1);
  CHECK(cube.dimension() == 3);
  for (double c : cube.points()) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
  CHECK(d.kind() == DesignKind::kRandomUniform);
  CHECK(d.seed() == 42u);
  CHECK_THROWS_AS(uniform_design(0, 1, 1), DomainError);
}

TEST_CASE("equidistant design") {
  const Design two = equidistant_design(2);
  CHECK(two.points()[0] == 0.25);
  CHECK(two.points()[1] == 0.75);
  CHECK(equidistant_design(1).points()[0] == 0.5);
  const Design d = equidistant_design(37);
  CHECK(std::is_sorted(d.points().begin(), d.points().end()));
  CHECK(std::adjacent_find(d.points().begin(), d.points().end()) == d.points().end());
  CHECK(d.kind() == DesignKind::kEquidistant);
  CHECK_FALSE(d.seed().has_value());
}

TEST_CASE("design validation") {
  CHECK_THROWS_AS(Design({0.5, 1.2}, 1, DesignKind::kRandomUniform), DomainError);
  CHECK_THROWS_AS(Design({}, 1, DesignKind::kRandomUniform), DomainError);
  CHECK_THROWS_AS(Design({0.1, 0.2, 0.3}, 2, DesignKind::kRandomUniform), DomainError);
  CHECK(design_kind_from_string("equidistant") == DesignKind::kEquidistant);
  CHECK(design_kind_from_string("random_uniform") == DesignKind::kRandomUniform);
  CHECK(design_kind_from_string(to_string(DesignKind::kRandomUniform)) == DesignKind::kRandomUniform);
  CHECK_THROWS_AS(design_kind_from_string("sobol"), ConfigError);
}

TEST_CASE("discrepancy examples") {
  CHECK(discrepancy(equidistant_design(10)) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(discrepancy(Design({0.5}, 1, DesignKind::kRandomUniform)) == 0.5);
  for (std::size_t n : {1u, 2u, 3u, 10u, 100u, 1000u, 100000u})
    CHECK(n * discrepancy(equidistant_design(n)) ==
          doctest::Approx(0.5).epsilon(4.0 * n * std::numeric_limits<double>::epsilon()));
  CHECK_THROWS_AS(discrepancy(uniform_design(10, 2, 1)), UnsupportedError);
}

TEST_CASE("property: discrepancy agrees with the brute-force oracle") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Design d = uniform_design(1 + seed * 7, 1, seed);
    CHECK(discrepancy(d) == doctest::Approx(discrepancy_oracle(d.column(0))).epsilon(1e-14));
  }
}

TEST_CASE("random designs are far rougher than the midpoint design") {
  const double d = discrepancy(uniform_design(10000, 1, 2024));
  CHECK(d > 10.0 / 10000.0);
}
