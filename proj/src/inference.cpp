#include "logitype/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "logitype/error.hpp"
#include "logitype/io.hpp"
#include "logitype/parallel.hpp"

namespace logitype {

namespace {

constexpr double kNegativeSlack = -1e-6;

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }
double normal_cdf(double z) { return boost::math::cdf(boost::math::normal(), z); }

// Fits one resample, first from `warm` (when given) and then from default_init.
std::optional<std::vector<double>> refit(const ChoiceDataset& sample, const ModelSpec& spec,
                                         const std::vector<double>* warm, const EstimationOptions& options) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 0 && !warm) continue;
    try {
      const auto r = fit(sample, spec, attempt == 0 ? std::optional(*warm) : std::nullopt, options);
      if (r.converged()) return r.packed_mle;
    } catch (const Error&) {
    }
  }
  return std::nullopt;
}

}  // namespace

double chi_square_sf(double stat, int df) {
  if (df <= 0) throw Error(ErrorCode::InvalidArgument, "df must be positive");
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * stat);
}

LRTestResult lr_test(double ll_full, double ll_restricted, int df) {
  double stat = 2.0 * (ll_full - ll_restricted);
  if (!std::isfinite(stat)) throw Error(ErrorCode::InvalidArgument, "log-likelihoods must be finite");
  if (stat < kNegativeSlack) {
    throw Error(ErrorCode::NegativeStatBeyondSlack,
                "2 (LL_full - LL_restricted) = " + format_double(stat) +
                    "; the models are not nested or a fit did not converge");
  }
  stat = std::max(stat, 0.0);
  return {stat, df, chi_square_sf(stat, df)};
}

LRTestResult lr_test(const EstimationResult& full, const EstimationResult& restricted, int df) {
  return lr_test(full.ll, restricted.ll, df);
}

int shape_df(const EstimationResult& full) {
  const ParameterLayout layout(full.spec, full.alternatives);
  return static_cast<int>(layout.n_shape());
}

std::vector<std::size_t> resample_observations(const ChoiceDataset& data, Rng& rng, bool stratified) {
  const std::size_t N = data.n_obs();
  std::vector<std::size_t> out;
  out.reserve(N);
  if (!stratified) {
    for (std::size_t i = 0; i < N; ++i) out.push_back(static_cast<std::size_t>(rng.below(N)));
    return out;
  }
  std::vector<std::vector<std::size_t>> strata(data.n_alternatives());
  for (std::size_t i = 0; i < N; ++i) strata[data.chosen_alt_index(i)].push_back(i);
  for (const auto& s : strata) {
    for (std::size_t k = 0; k < s.size(); ++k) out.push_back(s[rng.below(s.size())]);
  }
  return out;
}

BootstrapRun bootstrap(const ChoiceDataset& data, const ModelSpec& spec, const EstimationResult& full,
                       const BootstrapOptions& options) {
  if (options.replicates == 0) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least one replicate");
  const std::size_t dim = full.packed_mle.size();
  const std::size_t B = options.replicates;
  BootstrapRun run;
  run.B = B;
  run.seed = options.seed;
  run.names = full.names;
  run.replicate_estimates = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(dim),
                                                      std::numeric_limits<double>::quiet_NaN());
  run.converged.assign(B, 0);

  EstimationOptions fit_options = options.fit;
  fit_options.compute_hessian = false;
  fit_options.multistart = 0;
  const std::vector<double>* warm = options.warm_start ? &full.packed_mle : nullptr;

  parallel_for(B, [&](std::size_t b) {
    Rng rng(options.seed, b);
    const auto idx = resample_observations(data, rng, options.stratified);
    const auto estimate = refit(data.select(idx, true), spec, warm, fit_options);
    if (!estimate) return;
    run.converged[b] = 1;
    for (std::size_t k = 0; k < dim; ++k) {
      run.replicate_estimates(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(k)) = (*estimate)[k];
    }
  });
  run.failures = static_cast<std::size_t>(std::count(run.converged.begin(), run.converged.end(), 0));
  if (static_cast<double>(run.failures) > options.max_failure_rate * static_cast<double>(B)) {
    throw Error(ErrorCode::TooManyFailures, std::to_string(run.failures) + " of " + std::to_string(B) +
                                                " bootstrap replicates failed to converge");
  }

  if (options.jackknife) {
    const std::size_t N = data.n_obs();
    const std::size_t G = options.jackknife_groups == 0 ? N : std::min(options.jackknife_groups, N);
    run.jackknife_estimates = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(G), static_cast<Eigen::Index>(dim),
                                                        std::numeric_limits<double>::quiet_NaN());
    parallel_for(G, [&](std::size_t g) {
      const std::size_t begin = g * N / G;
      const std::size_t end = (g + 1) * N / G;
      std::vector<std::size_t> keep;
      keep.reserve(N - (end - begin));
      for (std::size_t i = 0; i < N; ++i) {
        if (i < begin || i >= end) keep.push_back(i);
      }
      const auto estimate = refit(data.select(keep, false), spec, &full.packed_mle, fit_options);
      if (!estimate) return;
      for (std::size_t k = 0; k < dim; ++k) {
        run.jackknife_estimates(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(k)) = (*estimate)[k];
      }
    });
  }
  return run;
}

double jackknife_acceleration(std::span<const double> jackknife) {
  std::vector<double> values;
  for (double v : jackknife) {
    if (std::isfinite(v)) values.push_back(v);
  }
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double num = 0.0, den = 0.0;
  for (double v : values) {
    const double d = mean - v;
    num += d * d * d;
    den += d * d;
  }
  if (den <= 0.0) return 0.0;
  return num / (6.0 * std::pow(den, 1.5));
}

Interval bca_interval(std::span<const double> replicates, double point, double level, double acceleration) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1)");
  std::vector<double> sorted;
  for (double v : replicates) {
    if (std::isfinite(v)) sorted.push_back(v);
  }
  if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "no finite bootstrap replicates");
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) return {sorted.front(), sorted.front(), true};

  const double B = static_cast<double>(sorted.size());
  const auto below = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), point) - sorted.begin());
  const auto ties = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), point) - sorted.begin()) - below;
  const double prop = std::clamp((below + 0.5 * ties) / B, 0.5 / B, 1.0 - 0.5 / B);
  const double z0 = normal_quantile(prop);

  auto endpoint = [&](double alpha) {
    const double z = z0 + normal_quantile(alpha);
    const double denom = 1.0 - acceleration * z;
    double q;
    if (denom > 0.0) {
      q = normal_cdf(z0 + z / denom);
    } else {
      q = acceleration * z > 0.0 ? 1.0 : 0.0;
    }
    // Phi(Phi^-1(alpha)) can land a few ulps above alpha; do not let that
    // rounding move the endpoint to the next order statistic.
    const double k = std::clamp(std::ceil(q * B * (1.0 - 1e-12)), 1.0, B);
    return sorted[static_cast<std::size_t>(k) - 1];
  };
  const double tail = 0.5 * (1.0 - level);
  return {endpoint(tail), endpoint(1.0 - tail), false};
}

std::vector<Interval> bca_intervals(const BootstrapRun& run, std::span<const double> point, double level) {
  const auto dim = run.replicate_estimates.cols();
  if (static_cast<std::size_t>(dim) != point.size()) {
    throw Error(ErrorCode::InvalidArgument, "point estimate does not match the bootstrap dimension");
  }
  std::vector<Interval> out;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const Eigen::VectorXd reps = run.replicate_estimates.col(k);
    double a = 0.0;
    if (run.jackknife_estimates.rows() > 0) {
      const Eigen::VectorXd jack = run.jackknife_estimates.col(k);
      a = jackknife_acceleration({jack.data(), static_cast<std::size_t>(jack.size())});
    }
    out.push_back(bca_interval({reps.data(), static_cast<std::size_t>(reps.size())},
                               point[static_cast<std::size_t>(k)], level, a));
  }
  return out;
}

std::string significance_stars(const Interval& i95, const Interval& i99) {
  auto excludes_zero = [](const Interval& i) { return i.lo > 0.0 || i.hi < 0.0; };
  if (excludes_zero(i99)) return "**";
  if (excludes_zero(i95)) return "*";
  return "";
}

std::string intervals_csv(const std::vector<std::string>& names, std::span<const double> point,
                          const std::vector<Interval>& i95, const std::vector<Interval>& i99) {
  std::string out = "parameter,estimate,lo95,hi95,lo99,hi99\n";
  for (std::size_t k = 0; k < names.size(); ++k) {
    out += names[k] + "," + format_double(point[k]) + "," + format_double(i95[k].lo) + "," +
           format_double(i95[k].hi) + "," + format_double(i99[k].lo) + "," + format_double(i99[k].hi) + "\n";
  }
  return out;
}

}  // namespace logitype
