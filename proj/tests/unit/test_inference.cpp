#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "logitype/error.hpp"
#include "logitype/inference.hpp"
#include "logitype/parallel.hpp"
#include "logitype/simulate.hpp"

using namespace logitype;

namespace {

SimulationConfig small_mnl(std::size_t n, std::uint64_t seed) {
  SimulationConfig c;
  c.spec.ref_alt = 1;
  c.spec.coefficients = {{"x", "x", {}}};
  c.alternatives = {1, 2, 3};
  c.true_params = {{0.7}, {0.0, 0.3, -0.5}, {}};
  c.n_obs = n;
  c.seed = seed;
  c.covariates = {{"x", CovariateGenerator::Kind::Normal, 0.0, 1.0, {}}};
  return c;
}

}  // namespace

TEST_CASE("chi-square tail against arbitrary-precision values") {
  CHECK(std::abs(chi_square_sf(3.841459, 1) - 0.049999994653195766) < 1e-15);
  CHECK(std::abs(chi_square_sf(5.0, 3) - 0.17179714429673314) < 1e-15);
  CHECK(std::abs(chi_square_sf(410.148, 8) / 1.2631140017858187e-83 - 1.0) < 1e-12);
  CHECK(chi_square_sf(0.0, 4) == 1.0);
}

TEST_CASE("likelihood-ratio test") {
  const auto equal = lr_test(-100.0, -100.0, 2);
  CHECK(equal.stat == 0.0);
  CHECK(equal.p_value == 1.0);
  const auto tiny = lr_test(-100.0, -100.0 + 4e-7, 1);
  CHECK(tiny.stat == 0.0);
  try {
    lr_test(-100.0, -99.0, 1);
    FAIL("expected NegativeStatBeyondSlack");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeStatBeyondSlack);
  }
  double last = 1.0;
  for (double s = 0.5; s < 40.0; s += 0.5) {
    const double p = lr_test(0.0, -s / 2.0, 3).p_value;
    CHECK(p < last);
    last = p;
  }
}

TEST_CASE("stratified resampling keeps class counts") {
  const auto data = simulate(small_mnl(300, 3));
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t i = 0; i < data.n_obs(); ++i) ++counts[data.chosen_alt_index(i)];
  Rng rng(5, 0);
  const auto idx = resample_observations(data, rng, true);
  REQUIRE(idx.size() == data.n_obs());
  std::vector<std::size_t> drawn(3, 0);
  for (std::size_t i : idx) ++drawn[data.chosen_alt_index(i)];
  CHECK(drawn == counts);
  Rng rng2(5, 0);
  CHECK(resample_observations(data, rng2, false).size() == data.n_obs());
}

TEST_CASE("bca degenerate and percentile reductions") {
  const std::vector<double> same(50, 1.25);
  const auto d = bca_interval(same, 1.25, 0.95, 0.0);
  CHECK(d.degenerate);
  CHECK(d.lo == 1.25);
  CHECK(d.hi == 1.25);

  // Symmetric replicates 1..200, point between the two middle values, a = 0:
  // z0 = 0, so endpoints are the plain percentiles ceil(0.025 B), ceil(0.975 B).
  std::vector<double> reps;
  for (int k = 1; k <= 200; ++k) reps.push_back(k);
  const auto p = bca_interval(reps, 100.5, 0.95, 0.0);
  CHECK(p.lo == 5.0);
  CHECK(p.hi == 195.0);
  const auto p99 = bca_interval(reps, 100.5, 0.99, 0.0);
  CHECK(p99.lo == 1.0);
  CHECK(p99.hi == 199.0);
}

TEST_CASE("bca is equivariant under monotone relabeling") {
  Rng rng(8, 0);
  std::vector<double> reps;
  for (int k = 0; k < 400; ++k) reps.push_back(rng.normal(0.3, 1.0) + 0.4 * rng.uniform());
  std::vector<double> relabeled;
  for (double v : reps) relabeled.push_back(std::exp(2.0 * v) + v);
  auto f = [](double v) { return std::exp(2.0 * v) + v; };
  for (double a : {0.0, 0.05, -0.08}) {
    const auto base = bca_interval(reps, 0.35, 0.9, a);
    const auto moved = bca_interval(relabeled, f(0.35), 0.9, a);
    CHECK(moved.lo == f(base.lo));
    CHECK(moved.hi == f(base.hi));
  }
}

TEST_CASE("jackknife acceleration") {
  CHECK(jackknife_acceleration(std::vector<double>{2.0, 2.0, 2.0}) == 0.0);
  // Values (0, 0, 3): mean 1, d = (1, 1, -2); sum d^3 = -6, sum d^2 = 6.
  CHECK(jackknife_acceleration(std::vector<double>{0.0, 0.0, 3.0}) ==
        doctest::Approx(-6.0 / (6.0 * std::pow(6.0, 1.5))).epsilon(1e-15));
}

TEST_CASE("bca coverage for a sample mean") {
  // Exponential(1) samples of size 40; the true mean is 1.
  constexpr int kOuter = 200;
  constexpr int kB = 1000;
  int covered = 0;
  for (int rep = 0; rep < kOuter; ++rep) {
    Rng rng(2024, static_cast<std::uint64_t>(rep));
    std::vector<double> x(40);
    for (double& v : x) v = -std::log(1.0 - rng.uniform());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= 40.0;
    std::vector<double> boot(kB);
    for (int b = 0; b < kB; ++b) {
      double s = 0.0;
      for (int k = 0; k < 40; ++k) s += x[rng.below(40)];
      boot[b] = s / 40.0;
    }
    std::vector<double> jack(40);
    for (int i = 0; i < 40; ++i) jack[i] = (mean * 40.0 - x[i]) / 39.0;
    const auto iv = bca_interval(boot, mean, 0.95, jackknife_acceleration(jack));
    if (iv.lo <= 1.0 && 1.0 <= iv.hi) ++covered;
  }
  const double coverage = covered / static_cast<double>(kOuter);
  CHECK(coverage >= 0.90);
  CHECK(coverage <= 0.99);
}

TEST_CASE("bootstrap on simulated MNL data") {
  const auto cfg = small_mnl(400, 12);
  const auto data = simulate(cfg);
  const auto full = fit(data, cfg.spec);
  REQUIRE(full.converged());
  BootstrapOptions opt;
  opt.replicates = 200;
  opt.seed = 99;
  const auto run = bootstrap(data, cfg.spec, full, opt);
  CHECK(run.failures == 0);
  CHECK(run.replicate_estimates.rows() == 200);
  CHECK(run.jackknife_estimates.rows() == 400);
  for (Eigen::Index k = 0; k < run.replicate_estimates.cols(); ++k) {
    const auto col = run.replicate_estimates.col(k);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1));
    CHECK(std::abs(mean - full.packed_mle[static_cast<std::size_t>(k)]) < 3.0 * sd);
  }
  const auto i95 = bca_intervals(run, full.packed_mle, 0.95);
  const auto i99 = bca_intervals(run, full.packed_mle, 0.99);
  for (std::size_t k = 0; k < i95.size(); ++k) {
    CHECK(i95[k].lo <= i95[k].hi);
    CHECK(i99[k].lo <= i95[k].lo);
    CHECK(i99[k].hi >= i95[k].hi);
  }
  CHECK(significance_stars(i95[0], i99[0]) == "**");  // beta = 0.7 at n = 400
  const auto csv = intervals_csv(run.names, full.packed_mle, i95, i99);
  CHECK(csv.rfind("parameter,estimate,lo95,hi95,lo99,hi99\nbeta_x,", 0) == 0);

  SUBCASE("thread count does not change replicates") {
    BootstrapOptions small = opt;
    small.replicates = 20;
    small.jackknife = false;
    set_max_threads(1);
    const auto serial = bootstrap(data, cfg.spec, full, small);
    set_max_threads(4);
    const auto threaded = bootstrap(data, cfg.spec, full, small);
    set_max_threads(0);
    CHECK(serial.replicate_estimates == threaded.replicate_estimates);
  }
}

TEST_CASE("bootstrap of identical observations gives identical replicates") {
  std::vector<ChoiceRow> rows;
  for (ObsId i = 0; i < 30; ++i) {
    rows.push_back({i, 1, i % 3 == 0, 1.0, {0.5}});
    rows.push_back({i, 2, i % 3 != 0, 1.0, {-0.5}});
  }
  // Two distinct row patterns would vary between resamples; keep one pattern
  // per class and stratify so every replicate has the same class counts.
  const auto data = ChoiceDataset::from_rows({"x"}, rows);
  ModelSpec spec;
  spec.ref_alt = 1;
  spec.coefficients = {{"x", "x", {}}};
  EstimationOptions fo;
  const auto full = fit(data, spec, std::vector<double>{0.1, 0.0}, fo);
  BootstrapOptions opt;
  opt.replicates = 10;
  opt.jackknife = false;
  opt.fit.fixed = {1, 0};  // beta and tau are not separately identified here
  const auto run = bootstrap(data, spec, full, opt);
  for (Eigen::Index b = 1; b < run.replicate_estimates.rows(); ++b) {
    CHECK(run.replicate_estimates.row(b) == run.replicate_estimates.row(0));
  }
}
