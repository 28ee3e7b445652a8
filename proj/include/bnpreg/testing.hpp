#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bnpreg/design.hpp"
#include "bnpreg/funcspace.hpp"
#include "bnpreg/inference.hpp"
#include "bnpreg/priors.hpp"

namespace bnpreg {

struct TestConfig {
  /// Radius factor of the alternative neighborhood ||f - f1|| <= xi ||f0 - f1||.
  double xi = 1.0 / (4.0 * std::numbers::sqrt2);
  int replications = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  double sigma = 1.0;
  DesignKind design = DesignKind::kRandomUniform;

  void validate() const;
};

/// T_n = sum y_i d_i - (n/2) P_n(f1^2 - f0^2) - sqrt(n) / (8 sqrt 2) ||d||_2 sqrt(n P_n d^2)
/// with d = f1 - f0. The test rejects f0 when T_n > 0.
double test_statistic_tn(const RegressionData& data, const SeriesFunction& f0,
                         const SeriesFunction& f1);
/// Same statistic from precomputed values at the design points.
double test_statistic_tn(std::span<const double> y, std::span<const double> f0_values,
                         std::span<const double> f1_values, double l2_gap);

struct ErrorEstimate {
  int n = 0;
  std::string statistic;
  double estimate = 0.0;
  double std_error = 0.0;
  int replications = 0;
  std::uint64_t seed = 0;
};

/// Fraction of replications with data from f0 in which T_n > 0.
ErrorEstimate mc_type1_error(const SeriesFunction& f0, const SeriesFunction& f1, int n,
                             const TestConfig& config);
/// Fraction of replications with data from f in which T_n <= 0.
ErrorEstimate mc_type2_error(const SeriesFunction& f, const SeriesFunction& f0,
                             const SeriesFunction& f1, int n, const TestConfig& config);

/// header n,statistic,estimate,std_error,replications,seed
std::string estimates_to_csv(std::span<const ErrorEstimate> rows);

enum class ConcentrationMode {
  kSieve,  // ||f - f0||_2 < eps and ||f - f0||_inf^2 <= eta' (k ||f - f0||_2^2 + omega^2)
  kSup,    // ||f - f0||_inf < eps
};

struct ConcentrationSet {
  int k = 1;
  double epsilon = 1.0;
  double omega = 1.0;
  double eta_prime = 1.0;
  ConcentrationMode mode = ConcentrationMode::kSieve;
};

bool in_concentration_set(const SeriesFunction& f, const SeriesFunction& f0,
                          const ConcentrationSet& set);

struct ConcentrationEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int draws = 0;
  int hits = 0;
  /// One-sided 95% upper bound 3 / draws when no draw hits the set.
  double zero_hit_bound = 0.0;
};

/// Plain Monte Carlo over prior draws; the prior must produce series draws.
ConcentrationEstimate prior_concentration_mc(const PriorSpec& prior, const SeriesFunction& f0,
                                             const ConcentrationSet& set, int draws,
                                             std::uint64_t seed, int threads = 1);

}  // namespace bnpreg
