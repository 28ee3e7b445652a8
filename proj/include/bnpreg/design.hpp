#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bnpreg {

enum class DesignKind { kRandomUniform, kEquidistant };

std::string to_string(DesignKind kind);
DesignKind design_kind_from_string(const std::string& name);

/// Ordered design points in [0, 1]^p, stored row-major (point i occupies
/// points()[i * p, (i + 1) * p)).
class Design {
 public:
  Design(std::vector<double> points, std::size_t dimension, DesignKind kind,
         std::optional<std::uint64_t> seed = std::nullopt);

  std::size_t size() const { return points_.size() / dimension_; }
  std::size_t dimension() const { return dimension_; }
  DesignKind kind() const { return kind_; }
  std::optional<std::uint64_t> seed() const { return seed_; }

  std::span<const double> points() const { return points_; }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(points_).subspan(i * dimension_, dimension_);
  }
  double coordinate(std::size_t i, std::size_t j) const { return points_[i * dimension_ + j]; }
  /// Coordinate j of every point.
  std::vector<double> column(std::size_t j) const;

  bool operator==(const Design&) const = default;

 private:
  std::vector<double> points_;
  std::size_t dimension_;
  DesignKind kind_;
  std::optional<std::uint64_t> seed_;
};

/// n i.i.d. Unif([0, 1]^p) points, deterministic in seed.
Design uniform_design(std::size_t n, std::size_t p, std::uint64_t seed);
/// Midpoint design x_i = (i - 1/2) / n.
Design equidistant_design(std::size_t n);
/// sup_x |n^{-1} #{x_i <= x} - x|, computed exactly from order statistics.
double discrepancy(const Design& design);

}  // namespace bnpreg
