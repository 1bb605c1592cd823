#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "logitype/error.hpp"
#include "logitype/likelihood.hpp"
#include "logitype/policy.hpp"
#include "logitype/random.hpp"
#include "logitype/simulate.hpp"

using namespace logitype;

namespace {

// Three alternatives: 1 drive (tolled), 2 walk-transit-walk, 3 walk-transit-drive.
SimulationConfig mode_config(std::size_t n, std::uint64_t seed) {
  SimulationConfig c;
  c.spec.ref_alt = 1;
  c.spec.coefficients = {{"cost", "cost", {}}, {"time", "time", {}}};
  c.alternatives = {1, 2, 3};
  c.true_params = {{-0.6, -0.9}, {0.0, 0.1, -0.4}, {}};
  c.n_obs = n;
  c.seed = seed;
  c.covariates = {{"cost", CovariateGenerator::Kind::Uniform, 0.5, 4.0, {{2, {1.0, 3.0}}}},
                  {"time", CovariateGenerator::Kind::Uniform, 0.2, 1.5, {}},
                  {"crossings", CovariateGenerator::Kind::Uniform, 0.0, 2.0, {{2, {0.0, 0.0}}, {3, {0.0, 0.0}}}}};
  return c;
}

Scenario toll_scenario() {
  Scenario s;
  s.name = "toll";
  Edit e;
  e.where.alts = {1};
  e.column = "cost";
  e.op = EditOp::Add;
  e.amount.times_sweep = true;
  e.amount.column = "crossings";
  s.edits.push_back(e);
  s.sweep = SweepGrid{"toll", {0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5}};
  return s;
}

}  // namespace

TEST_CASE("null scenario reproduces model shares") {
  const auto cfg = mode_config(200, 1);
  const auto data = simulate(cfg);
  const auto shares = enumerate_shares(data, cfg.spec, cfg.true_params, Scenario{});
  const auto p = probabilities(data, cfg.spec, cfg.true_params);
  std::map<AltId, double> direct;
  double w = 0.0;
  for (const auto& o : data.observations()) {
    w += o.weight;
    for (std::size_t r = o.begin; r < o.end; ++r) direct[data.row_alt(r)] += o.weight * p[r];
  }
  for (const auto& [a, e] : direct) {
    CHECK(std::abs(shares.expected.at(a) - e) < 1e-10);
    CHECK(std::abs(shares.share.at(a) - e / w) < 1e-12);
  }
}

TEST_CASE("single-observation hand computation") {
  std::vector<ChoiceRow> rows{{0, 1, true, 1.0, {0.0}}, {0, 2, false, 1.0, {0.0}}};
  const auto data = ChoiceDataset::from_rows({"cost"}, rows);
  ModelSpec spec;
  spec.ref_alt = 1;
  spec.coefficients = {{"cost", "cost", {}}};
  const NaturalParams params{{-1.0}, {0.0, 0.0}, {}};
  Scenario s;
  Edit e;
  e.where.alts = {1};
  e.column = "cost";
  e.amount.value = 0.5;
  s.edits.push_back(e);
  CHECK(enumerate_shares(data, spec, params, Scenario{}).share.at(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(enumerate_shares(data, spec, params, s).share.at(1) - 0.37754066879814544) < 1e-15);
  CHECK(data.x(0, 0) == 0.0);  // input untouched
}

TEST_CASE("edit operations") {
  std::vector<ChoiceRow> rows{{0, 1, true, 1.0, {2.0, 1.0}}, {0, 2, false, 1.0, {3.0, 0.0}},
                              {0, 3, false, 1.0, {0.5, 0.0}}};
  const auto data = ChoiceDataset::from_rows({"cost", "flag"}, rows);
  Scenario s;
  Edit a;  // related alternatives lose alt 1's fare, floored at 0
  a.where.alts = {2, 3};
  a.column = "cost";
  a.op = EditOp::SubtractFloor0;
  a.amount.column = "cost";
  a.amount.from_alt = 1;
  Edit b;  // alt 1 becomes free
  b.where.alts = {1};
  b.column = "cost";
  b.op = EditOp::Set;
  b.amount.value = 0.0;
  Edit c;  // flagged rows double
  c.where.where = {{"flag", RowPredicate::Condition::Op::Gt, 0.5}};
  c.column = "flag";
  c.op = EditOp::Multiply;
  c.amount.value = 2.0;
  s.edits = {b, a, c};
  const auto out = apply_scenario(data, s);
  CHECK(out.x(0, 0) == 0.0);
  CHECK(out.x(1, 0) == 1.0);
  CHECK(out.x(2, 0) == 0.0);
  CHECK(out.x(0, 1) == 2.0);
  CHECK(out.x(1, 1) == 0.0);

  Scenario bad;
  bad.edits = {Edit{{}, "nope", EditOp::Add, {}}};
  CHECK_THROWS_AS(apply_scenario(data, bad), Error);
  Scenario grid;
  grid.sweep = SweepGrid{"t", {1.0, 1.0}};
  CHECK_THROWS_AS(grid.validate(data), Error);
}

TEST_CASE("toll sweep conserves weight and lowers tolled shares") {
  const auto cfg = mode_config(500, 3);
  auto data = simulate(cfg);
  std::vector<double> weights;
  Rng rng(4);
  for (std::size_t i = 0; i < data.n_obs(); ++i) weights.push_back(rng.uniform(0.5, 3.0));
  data = data.with_weights(weights);
  const auto before = to_csv(data);
  const auto table = sweep(data, cfg.spec, cfg.true_params, toll_scenario());
  CHECK(to_csv(data) == before);
  REQUIRE(table.rows.size() == 11);
  double prev = 2.0;
  for (const auto& row : table.rows) {
    double total = 0.0;
    for (const auto& [a, e] : row.expected) total += e;
    CHECK(std::abs(total - data.total_weight()) < 1e-9);
    CHECK(row.share.at(1) <= prev);
    prev = row.share.at(1);
    const auto direct = enumerate_shares(data, cfg.spec, cfg.true_params, toll_scenario(), row.sweep_value);
    CHECK(direct.share.at(1) == row.share.at(1));
  }
  CHECK(table.rows.back().share.at(1) < table.rows.front().share.at(1));

  Scenario huge;
  Edit e;
  e.where.alts = {1};
  e.column = "cost";
  e.amount.value = 1e6;
  huge.edits.push_back(e);
  CHECK(enumerate_shares(data, cfg.spec, cfg.true_params, huge).share.at(1) < 1e-6);

  const auto csv = sweep_csv({table});
  CHECK(csv.rfind("model,toll,alt_id,expected,share\nmnl,0,1,", 0) == 0);
}

TEST_CASE("greedy prefix") {
  TargetingResult ranked;
  ranked.rows = {{1, 0.2, 0.2, 100.0, 1, false}, {2, 0.1, 0.1, 100.0, 2, false}};
  const auto one = select_targets(ranked, 100.0);
  CHECK(one.rows[0].selected);
  CHECK_FALSE(one.rows[1].selected);
  CHECK(one.efficiency == doctest::Approx(500.0));
  try {
    select_targets(ranked, 50.0);
    FAIL("expected EmptySelection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySelection);
  }
  // Strict prefix stops at the first unaffordable individual; skipping continues.
  TargetingResult mixed;
  mixed.rows = {{1, 0.5, 0.5, 10.0, 1, false}, {2, 0.9, 0.9, 30.0, 2, false}, {3, 0.1, 0.1, 5.0, 3, false}};
  CHECK(select_targets(mixed, 20.0).n_selected == 1);
  CHECK(select_targets(mixed, 20.0, true).n_selected == 2);
}

TEST_CASE("targeting ranks by delta-p per dollar and is budget monotone") {
  const auto cfg = mode_config(60, 5);
  const auto data = simulate(cfg);
  TargetingProblem problem;
  problem.selection = {cfg.spec, cfg.true_params};
  ModelSpec scobit = cfg.spec;
  scobit.transform = Family::Scobit;
  problem.truth = {scobit, {cfg.true_params.beta, cfg.true_params.tau, {{2.0}, {0.7}, {1.3}}}};
  problem.target_alt = 2;
  problem.related_alts = {3};
  const auto ranked = rank_targets(data, problem);
  CHECK(ranked.rows.size() + ranked.excluded == data.n_obs());
  for (std::size_t k = 1; k < ranked.rows.size(); ++k) {
    const auto& a = ranked.rows[k - 1];
    const auto& b = ranked.rows[k];
    CHECK((a.delta_p / a.cost > b.delta_p / b.cost || (a.delta_p / a.cost == b.delta_p / b.cost && a.obs_id < b.obs_id)));
    CHECK(a.delta_p > 0.0);
  }
  double total = 0.0;
  for (const auto& r : ranked.rows) total += r.cost;
  const auto all = select_targets(data, problem, total + 1.0);
  CHECK(all.n_selected == ranked.rows.size());

  std::vector<ObsId> prev;
  for (double budget = 50.0; budget <= total; budget += 37.0) {
    const auto res = select_targets(ranked, budget);
    CHECK(res.total_cost <= budget);
    std::vector<ObsId> chosen;
    for (const auto& r : res.rows) {
      if (r.selected) chosen.push_back(r.obs_id);
    }
    std::sort(chosen.begin(), chosen.end());
    CHECK(std::includes(chosen.begin(), chosen.end(), prev.begin(), prev.end()));
    prev = chosen;
  }
  const auto csv = targeting_csv({all});
  CHECK(csv.rfind("budget,obs_id,delta_p,delta_p_truth,cost,rank,selected\n", 0) == 0);
}

TEST_CASE("truth-model selection is optimal among all orderings") {
  // Equal pass costs, so each budget affords the same number of people and
  // the best any ordering can do is the top truth delta-p values.
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto cfg = mode_config(8, seed);
    cfg.covariates[0].per_alt = {{2, {2.0, 2.0}}};
    const auto data = simulate(cfg);
    TargetingProblem truth_sel;
    truth_sel.truth = truth_sel.selection = {cfg.spec, cfg.true_params};
    truth_sel.target_alt = 2;
    truth_sel.related_alts = {3};
    TargetingProblem other = truth_sel;
    other.selection.params.beta = {-0.1, -2.0};
    const auto ranked = rank_targets(data, truth_sel);
    REQUIRE(ranked.rows.size() == 8);
    std::vector<double> gain;
    for (const auto& r : ranked.rows) gain.push_back(r.delta_p_truth);
    for (double budget : {44.0, 88.0, 150.0, 300.0}) {
      const auto ours = select_targets(ranked, budget);
      std::vector<std::size_t> order(8);
      std::iota(order.begin(), order.end(), 0);
      double best = std::numeric_limits<double>::infinity();
      do {
        double cost = 0.0, g = 0.0;
        for (std::size_t k : order) {
          if (cost + 44.0 > budget) break;
          cost += 44.0;
          g += gain[k];
        }
        best = std::min(best, cost / g);
      } while (std::next_permutation(order.begin(), order.end()));
      CHECK(ours.efficiency <= best * (1.0 + 1e-12));
      CHECK(ours.efficiency <= select_targets(data, other, budget).efficiency * (1.0 + 1e-12));
    }
  }
}
