#include "bnpreg/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bnpreg/errors.hpp"
#include "bnpreg/numerics.hpp"

namespace bnpreg {

namespace {

void require_unit_interval(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream msg;
    msg << what << ": x = " << x << " outside [0, 1]";
    throw DomainError(msg.str());
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double FourierBasis::operator()(int k, double x) const {
  if (k < 1) throw DomainError("Fourier index must be >= 1");
  require_unit_interval(x, "Fourier basis");
  if (k == 1) return 1.0;
  const int freq = k / 2;
  const double omega = (orthonormal() ? 2.0 : 1.0) * std::numbers::pi * freq;
  return std::numbers::sqrt2 * ((k % 2 == 0) ? std::sin(omega * x) : std::cos(omega * x));
}

double FourierBasis::integral(int k) const {
  if (k < 1) throw DomainError("Fourier index must be >= 1");
  if (k == 1) return 1.0;
  if (orthonormal() || k % 2 == 1) return 0.0;
  const int m = k / 2;
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  return std::numbers::sqrt2 * (1.0 - sign) / (m * std::numbers::pi);
}

double eval_fourier(int k, double x, FourierConvention convention) {
  return FourierBasis(convention)(k, x);
}

double fourier_integral(int k, FourierConvention convention) {
  return FourierBasis(convention).integral(k);
}

HaarWaveletBasis::HaarWaveletBasis(int max_resolution) : max_resolution_(max_resolution) {
  if (max_resolution < 0 || max_resolution > 24)
    throw DomainError("Haar max resolution must lie in [0, 24]");
}

double HaarWaveletBasis::wavelet(int j, int k, double x) {
  if (j < 0) throw DomainError("Haar level must be >= 0");
  const long long count = 1LL << j;
  if (k < 0 || k >= count) throw DomainError("Haar translation outside {0, ..., 2^j - 1}");
  require_unit_interval(x, "Haar basis");
  const double t = std::ldexp(x, j) - k;
  const double height = std::exp2(0.5 * j);
  if (t >= 0.0 && t < 0.5) return height;
  if (t >= 0.5 && t < 1.0) return -height;
  if (t == 1.0 && k == count - 1) return -height;  // right endpoint x = 1
  return 0.0;
}

std::size_t HaarWaveletBasis::flat_index(int j, int k) {
  return (std::size_t{1} << j) + static_cast<std::size_t>(k);
}

double HaarWaveletBasis::operator()(std::size_t flat, double x) const {
  if (flat >= size()) throw DomainError("Haar flat index beyond max resolution");
  if (flat == 0) {
    require_unit_interval(x, "Haar basis");
    return 1.0;
  }
  int j = 0;
  while ((std::size_t{2} << j) <= flat) ++j;
  return wavelet(j, static_cast<int>(flat - (std::size_t{1} << j)), x);
}

double eval_haar(int j, int k, double x) { return HaarWaveletBasis::wavelet(j, k, x); }

namespace {

std::vector<double> uniform_breakpoints(int subintervals) {
  if (subintervals < 1) throw DomainError("B-spline needs at least one subinterval");
  std::vector<double> bp(static_cast<std::size_t>(subintervals) + 1);
  for (int i = 0; i <= subintervals; ++i)
    bp[static_cast<std::size_t>(i)] = static_cast<double>(i) / subintervals;
  bp.back() = 1.0;
  return bp;
}

}  // namespace

BSplineBasis::BSplineBasis(int order, int subintervals)
    : BSplineBasis(order, uniform_breakpoints(subintervals)) {}

BSplineBasis::BSplineBasis(int order, std::vector<double> breakpoints)
    : order_(order), breakpoints_(std::move(breakpoints)) {
  if (order_ < 1) throw DomainError("B-spline order must be >= 1");
  if (breakpoints_.size() < 2) throw DomainError("B-spline needs at least one subinterval");
  if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0)
    throw DomainError("B-spline breakpoints must start at 0 and end at 1");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i)
    if (!(breakpoints_[i] > breakpoints_[i - 1]))
      throw DomainError("B-spline breakpoints must be strictly increasing");
  knots_.assign(static_cast<std::size_t>(order_ - 1), 0.0);
  knots_.insert(knots_.end(), breakpoints_.begin(), breakpoints_.end());
  knots_.insert(knots_.end(), static_cast<std::size_t>(order_ - 1), 1.0);
}

std::size_t BSplineBasis::find_span(double x) const {
  const auto m = static_cast<std::size_t>(dimension());
  const auto p = static_cast<std::size_t>(order_ - 1);
  if (x >= knots_[m]) return m - 1;
  // Last index with knots_[span] <= x, restricted to [p, m - 1].
  auto it = std::upper_bound(knots_.begin() + static_cast<std::ptrdiff_t>(p),
                             knots_.begin() + static_cast<std::ptrdiff_t>(m) + 1, x);
  return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

void BSplineBasis::evaluate_all(double x, std::span<double> out) const {
  require_unit_interval(x, "B-spline basis");
  const auto m = static_cast<std::size_t>(dimension());
  if (out.size() != m) throw DomainError("B-spline output span must have size m");
  std::fill(out.begin(), out.end(), 0.0);
  const int p = order_ - 1;
  const std::size_t span = find_span(x);
  // Stack scratch covers every practical order; larger orders fall back to the heap.
  constexpr std::size_t kStackOrder = 16;
  std::array<double, 3 * kStackOrder> stack{};
  std::vector<double> heap;
  double* scratch = stack.data();
  const auto width = static_cast<std::size_t>(p) + 1;
  if (width > kStackOrder) {
    heap.assign(3 * width, 0.0);
    scratch = heap.data();
  }
  const std::span<double> local(scratch, width);
  const std::span<double> left(scratch + width, width);
  const std::span<double> right(scratch + 2 * width, width);
  local[0] = 1.0;
  // Cox-de Boor triangle for the p + 1 functions that are nonzero on `span`.
  for (int j = 1; j <= p; ++j) {
    left[static_cast<std::size_t>(j)] = x - knots_[span + 1 - static_cast<std::size_t>(j)];
    right[static_cast<std::size_t>(j)] = knots_[span + static_cast<std::size_t>(j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[static_cast<std::size_t>(r) + 1] +
                           left[static_cast<std::size_t>(j - r)];
      const double temp = local[static_cast<std::size_t>(r)] / denom;
      local[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r) + 1] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    local[static_cast<std::size_t>(j)] = saved;
  }
  for (int r = 0; r <= p; ++r) out[span - static_cast<std::size_t>(p) + static_cast<std::size_t>(r)] = local[static_cast<std::size_t>(r)];
}

double BSplineBasis::operator()(int k, double x) const {
  if (k < 1 || k > dimension()) throw DomainError("B-spline index outside 1..m");
  std::vector<double> values(static_cast<std::size_t>(dimension()));
  evaluate_all(x, values);
  return values[static_cast<std::size_t>(k - 1)];
}

double BSplineBasis::integral(int k) const {
  if (k < 1 || k > dimension()) throw DomainError("B-spline index outside 1..m");
  const auto i = static_cast<std::size_t>(k - 1);
  return (knots_[i + static_cast<std::size_t>(order_)] - knots_[i]) / order_;
}

double eval_bspline(const BSplineBasis& basis, int k, double x) { return basis(k, x); }

std::size_t basis_capacity(const Basis& basis) {
  return std::visit(
      Overloaded{[](const FourierBasis&) { return std::numeric_limits<std::size_t>::max(); },
                 [](const HaarWaveletBasis& b) { return b.size(); },
                 [](const BSplineBasis& b) { return static_cast<std::size_t>(b.dimension()); }},
      basis);
}

bool is_orthonormal(const Basis& basis) {
  return std::visit(Overloaded{[](const FourierBasis& b) { return b.orthonormal(); },
                               [](const HaarWaveletBasis&) { return true; },
                               [](const BSplineBasis&) { return false; }},
                    basis);
}

std::string basis_name(const Basis& basis) {
  return std::visit(Overloaded{[](const FourierBasis&) { return std::string("fourier"); },
                               [](const HaarWaveletBasis&) { return std::string("haar"); },
                               [](const BSplineBasis&) { return std::string("bspline"); }},
                    basis);
}

double basis_value(const Basis& basis, std::size_t index, double x) {
  return std::visit(
      Overloaded{[&](const FourierBasis& b) { return b(static_cast<int>(index) + 1, x); },
                 [&](const HaarWaveletBasis& b) { return b(index, x); },
                 [&](const BSplineBasis& b) { return b(static_cast<int>(index) + 1, x); }},
      basis);
}

void basis_values(const Basis& basis, double x, std::span<double> out) {
  if (out.size() > basis_capacity(basis))
    throw DomainError("requested more basis functions than the basis carries");
  if (const auto* spline = std::get_if<BSplineBasis>(&basis)) {
    const auto m = static_cast<std::size_t>(spline->dimension());
    if (out.size() == m) {
      spline->evaluate_all(x, out);
      return;
    }
    std::vector<double> all(m);
    spline->evaluate_all(x, all);
    std::copy_n(all.begin(), out.size(), out.begin());
    return;
  }
  if (const auto* fourier = std::get_if<FourierBasis>(&basis)) {
    require_unit_interval(x, "Fourier basis");
    const double scale = (fourier->orthonormal() ? 2.0 : 1.0) * std::numbers::pi;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::size_t k = i + 1;
      if (k == 1) {
        out[i] = 1.0;
        continue;
      }
      const double arg = scale * static_cast<double>(k / 2) * x;
      out[i] = std::numbers::sqrt2 * ((k % 2 == 0) ? std::sin(arg) : std::cos(arg));
    }
    return;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = basis_value(basis, i, x);
}

double basis_integral(const Basis& basis, std::size_t index) {
  return std::visit(
      Overloaded{[&](const FourierBasis& b) { return b.integral(static_cast<int>(index) + 1); },
                 [&](const HaarWaveletBasis& b) {
                   if (index >= b.size()) throw DomainError("Haar flat index beyond max resolution");
                   return index == 0 ? 1.0 : 0.0;
                 },
                 [&](const BSplineBasis& b) { return b.integral(static_cast<int>(index) + 1); }},
      basis);
}

Eigen::MatrixXd design_matrix(const Basis& basis, std::span<const double> points,
                              std::size_t count) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(count));
  std::vector<double> row(count);
  for (std::size_t i = 0; i < points.size(); ++i) {
    basis_values(basis, points[i], row);
    for (std::size_t k = 0; k < count; ++k)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
  }
  return out;
}

double orthonormality_check(const Basis& basis, int max_index, int quad_points) {
  if (max_index < 1) throw DomainError("orthonormality check needs max_index >= 1");
  if (quad_points < 4 * max_index)
    throw DomainError("orthonormality check needs quad_points >= 4 * max_index");
  const auto count = static_cast<std::size_t>(max_index);
  const auto nodes = midpoint_nodes(quad_points);
  const Eigen::MatrixXd values = design_matrix(basis, nodes, count);
  const Eigen::MatrixXd gram = values.transpose() * values / static_cast<double>(quad_points);
  return (gram - Eigen::MatrixXd::Identity(max_index, max_index)).cwiseAbs().maxCoeff();
}

}  // namespace bnpreg
