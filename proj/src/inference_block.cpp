#include <cmath>
#include <limits>
#include <sstream>

#include "bnpreg/errors.hpp"
#include "bnpreg/inference.hpp"
#include "inference_detail.hpp"

namespace bnpreg {

namespace {

// Floor on log A keeps 1 / A finite in the precision matrix.
constexpr double kLogVarianceFloor = -460.0;

struct VarianceBlock {
  Eigen::Index start;  // 0-based coefficient index
  Eigen::Index size;
  const PiecewiseLinearDensity* density;
};

PosteriorDraws run_block_gibbs(const RegressionData& data, const Basis& basis,
                               Eigen::Index count, const std::vector<VarianceBlock>& blocks,
                               const std::vector<Eigen::Index>& unit_variance,
                               const McmcConfig& config) {
  config.validate();
  if (data.design.dimension() != 1) throw UnsupportedError("block priors need a 1-D design");
  const double inv_s2 = config.likelihood ? 1.0 / (data.sigma * data.sigma) : 0.0;
  const Eigen::MatrixXd b =
      design_matrix(basis, data.design.points(), static_cast<std::size_t>(count));
  const Eigen::Map<const Eigen::VectorXd> y(data.responses.data(),
                                            static_cast<Eigen::Index>(data.size()));
  const Eigen::MatrixXd gram = b.transpose() * b * inv_s2;
  const Eigen::VectorXd h = b.transpose() * y * inv_s2;
  Rng rng(config.seed);

  std::vector<double> variance;
  for (const auto& blk : blocks) variance.push_back(blk.density->support_max() / 2.0);
  Eigen::VectorXd prior_precision = Eigen::VectorXd::Zero(count);
  for (Eigen::Index i : unit_variance) prior_precision[i] = 1.0;

  PosteriorDraws out;
  Eigen::VectorXd beta(count);
  Eigen::VectorXd z(count);
  for (int it = 0; it < config.iterations; ++it) {
    for (std::size_t l = 0; l < blocks.size(); ++l)
      prior_precision.segment(blocks[l].start, blocks[l].size).setConstant(1.0 / variance[l]);
    Eigen::MatrixXd precision = gram;
    precision.diagonal() += prior_precision;
    const Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success)
      throw SamplerError("block Gibbs: conditional precision of beta is not positive definite");
    for (Eigen::Index i = 0; i < count; ++i) z[i] = standard_normal(rng);
    beta = llt.solve(h) + llt.matrixU().solve(z);

    for (std::size_t l = 0; l < blocks.size(); ++l) {
      const auto& blk = blocks[l];
      const double ss = beta.segment(blk.start, blk.size).squaredNorm();
      const double half_n = 0.5 * static_cast<double>(blk.size);
      const PiecewiseLinearDensity& g = *blk.density;
      // Target of u = log A: g(e^u) e^{u (1 - n/2)} exp(-ss e^{-u} / 2).
      auto log_target = [&](double u) {
        return g.log_density(std::exp(u)) + u * (1.0 - half_n) - 0.5 * ss * std::exp(-u);
      };
      const double u0 = std::log(variance[l]);
      if (!std::isfinite(log_target(u0))) {
        std::ostringstream msg;
        msg << "block Gibbs: variance conditional has no mass at the current state (block " << l
            << ", A = " << variance[l] << ", |beta|^2 = " << ss << ", size " << blk.size
            << ", iteration " << it << ")";
        throw SamplerError(msg.str());
      }
      const double u =
          detail::slice_sample(log_target, u0, kLogVarianceFloor, std::log(g.support_max()), 1.0, rng);
      variance[l] = std::exp(u);
    }
    if (config.keep(it)) {
      out.draws.emplace_back(basis, std::vector<double>(beta.data(), beta.data() + count));
      out.hyper.push_back(variance);
    }
  }
  out.diagnostics.acceptance["gibbs"] = 1.0;
  out.diagnostics.seed = config.seed;
  out.diagnostics.kept = out.draws.size();
  out.diagnostics.ess = detail::norm_trace_ess(out.draws);
  return out;
}

}  // namespace

PosteriorDraws fit_block_gibbs(const RegressionData& data, const BlockPriorFourier& prior,
                               const McmcConfig& config) {
  if (static_cast<int>(prior.densities.size()) != prior.max_level + 1)
    throw ConfigError("block prior needs one density per level");
  std::vector<VarianceBlock> blocks;
  for (int l = 0; l <= prior.max_level; ++l) {
    const BlockRange r = block_partition(l);
    blocks.push_back({r.k_start - 1, r.size, &prior.densities[static_cast<std::size_t>(l)]});
  }
  PosteriorDraws out =
      run_block_gibbs(data, FourierBasis{}, prior.coefficient_count(), blocks, {}, config);
  // Expected ||f||_2^2 of the omitted levels: sum n_l E[A_l].
  double tail = 0.0;
  for (int l = prior.max_level + 1; l <= std::min(prior.max_level + 8, 26); ++l)
    tail += block_partition(l).size * std::exp(fourier_gl(l).log_first_moment());
  out.diagnostics.truncation_mass = tail;
  return out;
}

PosteriorDraws fit_block_gibbs(const RegressionData& data, const BlockPriorWavelet& prior,
                               const McmcConfig& config) {
  if (static_cast<int>(prior.densities.size()) != prior.max_resolution + 1)
    throw ConfigError("wavelet block prior needs one density per level");
  std::vector<VarianceBlock> blocks;
  for (int j = 0; j <= prior.max_resolution; ++j)
    blocks.push_back({Eigen::Index{1} << j, Eigen::Index{1} << j,
                      &prior.densities[static_cast<std::size_t>(j)]});
  PosteriorDraws out = run_block_gibbs(data, HaarWaveletBasis(prior.max_resolution),
                                       prior.coefficient_count(), blocks, {0}, config);
  double tail = 0.0;
  for (int j = prior.max_resolution + 1; j <= std::min(prior.max_resolution + 8, 24); ++j)
    tail += std::ldexp(1.0, j) * std::exp(wavelet_gj(j).log_first_moment());
  out.diagnostics.truncation_mass = tail;
  return out;
}

}  // namespace bnpreg
