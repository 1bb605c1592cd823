#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logitype/choice_data.hpp"
#include "logitype/estimation.hpp"
#include "logitype/random.hpp"

namespace logitype {

struct LRTestResult {
  double stat = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Upper tail of chi-square(df) at `stat`.
double chi_square_sf(double stat, int df);

/// stat = 2 (LL_full - LL_restricted). Values down to -1e-6 are treated as
/// rounding and clamped to 0; anything lower throws NegativeStatBeyondSlack.
LRTestResult lr_test(double ll_full, double ll_restricted, int df);
LRTestResult lr_test(const EstimationResult& full, const EstimationResult& restricted, int df);

/// Free shape parameters of a fit, the usual df against a nested MNL.
int shape_df(const EstimationResult& full);

struct BootstrapOptions {
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  bool stratified = true;  // resample within chosen-alternative classes
  bool warm_start = true;  // start replicate fits at the full-sample MLE
  bool jackknife = true;
  /// Leave-one-group-out jackknife with this many contiguous groups; 0 means
  /// one observation per group.
  std::size_t jackknife_groups = 0;
  double max_failure_rate = 0.1;
  EstimationOptions fit;
};

struct BootstrapRun {
  std::size_t B = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd replicate_estimates;  // B x packed dimension; failed rows are NaN
  Eigen::MatrixXd jackknife_estimates;  // groups x packed dimension
  std::vector<unsigned char> converged;  // per replicate
  std::size_t failures = 0;
  std::vector<std::string> names;
};

/// Observation indices of one resample. Stratified draws keep each chosen
/// alternative's count; the output lists strata in alternative order.
std::vector<std::size_t> resample_observations(const ChoiceDataset& data, Rng& rng, bool stratified);

/// Non-parametric bootstrap over observations. Replicate b uses
/// Rng(seed, b), so results do not depend on the thread count.
/// Throws TooManyFailures.
BootstrapRun bootstrap(const ChoiceDataset& data, const ModelSpec& spec, const EstimationResult& full,
                       const BootstrapOptions& options);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate = false;  // every replicate equal
};

/// a = sum d^3 / (6 (sum d^2)^1.5) with d_i = mean - theta_(i); 0 when all equal.
double jackknife_acceleration(std::span<const double> jackknife);

/// Bias-corrected and accelerated percentile interval. z0 counts ties as
/// half and its proportion is clamped to [0.5/B, 1 - 0.5/B]; endpoints are
/// order statistics at index clamp(ceil(q B), 1, B). Non-finite replicates
/// are ignored.
Interval bca_interval(std::span<const double> replicates, double point, double level, double acceleration);

/// Per-parameter BCa intervals for a bootstrap run.
std::vector<Interval> bca_intervals(const BootstrapRun& run, std::span<const double> point, double level);

/// "**" when the 99% interval excludes 0, "*" when only the 95% one does.
std::string significance_stars(const Interval& i95, const Interval& i99);

/// CSV with columns parameter, estimate, lo95, hi95, lo99, hi99.
std::string intervals_csv(const std::vector<std::string>& names, std::span<const double> point,
                          const std::vector<Interval>& i95, const std::vector<Interval>& i99);

}  // namespace logitype
