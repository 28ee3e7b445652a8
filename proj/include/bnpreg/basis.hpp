#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace bnpreg {

/// Trigonometric system on [0, 1] indexed from k = 1 with psi_1 = 1.
///
/// kOrthonormal: psi_{2k} = sqrt(2) sin(2 pi k x), psi_{2k+1} = sqrt(2) cos(2 pi k x).
/// kHalfPeriod:  psi_{2k} = sqrt(2) sin(pi k x),   psi_{2k+1} = sqrt(2) cos(pi k x).
/// The half-period system is not orthogonal on [0, 1] (psi_1 and psi_2 have
/// inner product 2 sqrt(2) / pi); distances between half-period expansions are
/// therefore computed by quadrature, never by Parseval.
enum class FourierConvention { kOrthonormal, kHalfPeriod };

class FourierBasis {
 public:
  explicit FourierBasis(FourierConvention convention = FourierConvention::kOrthonormal)
      : convention_(convention) {}

  FourierConvention convention() const { return convention_; }
  bool orthonormal() const { return convention_ == FourierConvention::kOrthonormal; }

  /// psi_k(x); throws DomainError for k < 1 or x outside [0, 1].
  double operator()(int k, double x) const;
  /// Closed-form integral of psi_k over [0, 1].
  double integral(int k) const;

  bool operator==(const FourierBasis&) const = default;

 private:
  FourierConvention convention_;
};

double eval_fourier(int k, double x,
                    FourierConvention convention = FourierConvention::kOrthonormal);
double fourier_integral(int k,
                        FourierConvention convention = FourierConvention::kOrthonormal);

/// Haar system truncated at resolution J. Flat coefficient layout: index 0 is
/// the scaling function (identically 1), and level j occupies indices
/// [2^j, 2^{j+1}) with psi_{jk} at 2^j + k.
class HaarWaveletBasis {
 public:
  explicit HaarWaveletBasis(int max_resolution);

  int max_resolution() const { return max_resolution_; }
  std::size_t size() const { return std::size_t{2} << max_resolution_; }

  /// psi_{jk}(x) = 2^{j/2} h(2^j x - k) with h = 1 on [0, 1/2), -1 on [1/2, 1).
  static double wavelet(int j, int k, double x);
  static std::size_t flat_index(int j, int k);
  double operator()(std::size_t flat, double x) const;

  bool operator==(const HaarWaveletBasis&) const = default;

 private:
  int max_resolution_;
};

double eval_haar(int j, int k, double x);

/// Clamped B-splines of order q (degree q - 1) on breakpoints
/// 0 = t_0 < ... < t_K = 1; dimension m = q + K - 1.
class BSplineBasis {
 public:
  BSplineBasis(int order, int subintervals);
  BSplineBasis(int order, std::vector<double> breakpoints);

  int order() const { return order_; }
  int subintervals() const { return static_cast<int>(breakpoints_.size()) - 1; }
  int dimension() const { return order_ + subintervals() - 1; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  /// B_k(x) for 1 <= k <= m.
  double operator()(int k, double x) const;
  /// Writes all m basis values at x into out (size m).
  void evaluate_all(double x, std::span<double> out) const;
  /// Integral of B_k over [0, 1]: (t_{k+q} - t_k) / q on the extended knots.
  double integral(int k) const;

  bool operator==(const BSplineBasis&) const = default;

 private:
  std::size_t find_span(double x) const;

  int order_;
  std::vector<double> breakpoints_;
  std::vector<double> knots_;  // extended, q-fold boundary knots
};

double eval_bspline(const BSplineBasis& basis, int k, double x);

using Basis = std::variant<FourierBasis, HaarWaveletBasis, BSplineBasis>;

/// Maximum number of coefficients a basis carries (Fourier is unbounded).
std::size_t basis_capacity(const Basis& basis);
bool is_orthonormal(const Basis& basis);
std::string basis_name(const Basis& basis);

/// Value of the basis function at 0-based flat index.
double basis_value(const Basis& basis, std::size_t index, double x);
/// Values of the first out.size() basis functions at x.
void basis_values(const Basis& basis, double x, std::span<double> out);
/// Integral over [0, 1] of the basis function at 0-based flat index.
double basis_integral(const Basis& basis, std::size_t index);
/// n x count matrix of basis values at the given points.
Eigen::MatrixXd design_matrix(const Basis& basis, std::span<const double> points,
                              std::size_t count);

constexpr int kDefaultQuadraturePanels = 4096;

/// max_{j,k < max_index} |int psi_j psi_k - delta_jk| by the composite
/// midpoint rule with quad_points panels. For Haar, max_index counts flat
/// indices (including the scaling function).
double orthonormality_check(const Basis& basis, int max_index,
                            int quad_points = kDefaultQuadraturePanels);

}  // namespace bnpreg
