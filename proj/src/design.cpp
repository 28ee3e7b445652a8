#include "bnpreg/design.hpp"

#include <algorithm>
#include <cmath>

#include "bnpreg/errors.hpp"
#include "bnpreg/rng.hpp"

namespace bnpreg {

std::string to_string(DesignKind kind) {
  return kind == DesignKind::kEquidistant ? "equidistant" : "random-uniform";
}

DesignKind design_kind_from_string(const std::string& name) {
  if (name == "equidistant") return DesignKind::kEquidistant;
  if (name == "random-uniform" || name == "random_uniform" || name == "uniform" || name == "random")
    return DesignKind::kRandomUniform;
  throw ConfigError("unknown design kind '" + name + "'");
}

Design::Design(std::vector<double> points, std::size_t dimension, DesignKind kind,
               std::optional<std::uint64_t> seed)
    : points_(std::move(points)), dimension_(dimension), kind_(kind), seed_(seed) {
  if (dimension_ == 0) throw DomainError("design dimension must be >= 1");
  if (points_.empty()) throw DomainError("design must contain at least one point");
  if (points_.size() % dimension_ != 0)
    throw DomainError("design coordinate count is not a multiple of the dimension");
  for (double v : points_)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("design coordinate outside [0, 1]");
}

std::vector<double> Design::column(std::size_t j) const {
  if (j >= dimension_) throw DomainError("design column out of range");
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = coordinate(i, j);
  return out;
}

Design uniform_design(std::size_t n, std::size_t p, std::uint64_t seed) {
  if (n == 0) throw DomainError("uniform design needs n >= 1");
  if (p == 0) throw DomainError("uniform design needs p >= 1");
  Rng rng(seed);
  std::vector<double> pts(n * p);
  for (double& v : pts) v = uniform01(rng);
  return Design(std::move(pts), p, DesignKind::kRandomUniform, seed);
}

Design equidistant_design(std::size_t n) {
  if (n == 0) throw DomainError("equidistant design needs n >= 1");
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i)
    pts[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return Design(std::move(pts), 1, DesignKind::kEquidistant);
}

double discrepancy(const Design& design) {
  if (design.dimension() != 1)
    throw UnsupportedError("discrepancy is defined for one-dimensional designs only");
  std::vector<double> x(design.points().begin(), design.points().end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  // The empirical CDF jumps at each order statistic: compare with x just
  // before the jump ((i - 1) / n) and at it (i / n). Ties are covered because
  // the last of a run of equal values sees the full jump.
  double sup = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double before = static_cast<double>(i) / n;
    const double after = static_cast<double>(i + 1) / n;
    sup = std::max({sup, std::abs(x[i] - before), std::abs(after - x[i])});
  }
  return sup;
}

}  // namespace bnpreg
