#include "logitype/policy.hpp"

#include <algorithm>
#include <cmath>

#include "logitype/error.hpp"
#include "logitype/io.hpp"
#include "logitype/likelihood.hpp"
#include "logitype/parallel.hpp"

namespace logitype {

namespace {

std::optional<std::size_t> row_of(const ChoiceDataset& data, std::size_t obs, AltId alt) {
  const auto& o = data.observation(obs);
  for (std::size_t r = o.begin; r < o.end; ++r) {
    if (data.row_alt(r) == alt) return r;
  }
  return std::nullopt;
}

template <class T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

bool RowPredicate::matches(const ChoiceDataset& data, std::size_t obs_index, std::size_t row) const {
  if (!alts.empty() && !contains(alts, data.row_alt(row))) return false;
  if (!obs.empty() && !contains(obs, data.observation(obs_index).id)) return false;
  for (const auto& c : where) {
    const double x = data.x(row, data.require_column(c.column));
    bool ok = false;
    switch (c.op) {
      case Condition::Op::Lt: ok = x < c.value; break;
      case Condition::Op::Le: ok = x <= c.value; break;
      case Condition::Op::Gt: ok = x > c.value; break;
      case Condition::Op::Ge: ok = x >= c.value; break;
      case Condition::Op::Eq: ok = x == c.value; break;
      case Condition::Op::Ne: ok = x != c.value; break;
    }
    if (!ok) return false;
  }
  return true;
}

void Scenario::validate(const ChoiceDataset& data) const {
  for (const auto& e : edits) {
    data.require_column(e.column);
    if (e.amount.column) data.require_column(*e.amount.column);
    for (const auto& c : e.where.where) data.require_column(c.column);
    if (e.amount.from_alt && !e.amount.column) {
      throw Error(ErrorCode::InvalidArgument, "from_alt needs an amount column");
    }
  }
  if (sweep) {
    if (sweep->values.empty()) throw Error(ErrorCode::InvalidArgument, "sweep grid is empty");
    for (std::size_t k = 1; k < sweep->values.size(); ++k) {
      if (!(sweep->values[k] > sweep->values[k - 1])) {
        throw Error(ErrorCode::InvalidArgument, "sweep grid must be strictly increasing");
      }
    }
  }
}

ChoiceDataset apply_scenario(const ChoiceDataset& data, const Scenario& scenario, double sweep_value) {
  scenario.validate(data);
  if (scenario.edits.empty()) return data;
  const std::size_t width = data.n_columns();
  std::vector<double> cov(data.covariates().begin(), data.covariates().end());
  for (const auto& e : scenario.edits) {
    const std::size_t target = data.require_column(e.column);
    const auto amount_col = e.amount.column ? std::optional(data.require_column(*e.amount.column)) : std::nullopt;
    for (std::size_t i = 0; i < data.n_obs(); ++i) {
      const auto& o = data.observation(i);
      for (std::size_t r = o.begin; r < o.end; ++r) {
        if (!e.where.matches(data, i, r)) continue;
        double amount = e.amount.value * (e.amount.times_sweep ? sweep_value : 1.0);
        if (amount_col) {
          std::size_t src = r;
          if (e.amount.from_alt) {
            const auto found = row_of(data, i, *e.amount.from_alt);
            if (!found) continue;
            src = *found;
          }
          amount *= data.x(src, *amount_col);
        }
        double& cell = cov[r * width + target];
        switch (e.op) {
          case EditOp::Add: cell += amount; break;
          case EditOp::Multiply: cell *= amount; break;
          case EditOp::Set: cell = amount; break;
          case EditOp::SubtractFloor0: cell = std::max(0.0, cell - amount); break;
        }
      }
    }
  }
  return data.with_covariates(std::move(cov));
}

ShareResult enumerate_shares(const ChoiceDataset& data, const ModelSpec& spec, const NaturalParams& params,
                             const Scenario& scenario, double sweep_value) {
  const auto edited = apply_scenario(data, scenario, sweep_value);
  const auto p = probabilities(edited, spec, params);
  const std::size_t J = data.n_alternatives();
  std::vector<std::vector<double>> terms(J);
  std::vector<double> weights;
  for (std::size_t i = 0; i < edited.n_obs(); ++i) {
    const auto& o = edited.observation(i);
    weights.push_back(o.weight);
    for (std::size_t r = o.begin; r < o.end; ++r) terms[edited.row_alt_index(r)].push_back(o.weight * p[r]);
  }
  ShareResult out;
  out.sweep_value = sweep_value;
  out.total_weight = pairwise_sum(weights.data(), weights.size());
  for (std::size_t j = 0; j < J; ++j) {
    const AltId a = data.alternatives()[j];
    out.expected[a] = pairwise_sum(terms[j].data(), terms[j].size());
    out.share[a] = out.total_weight > 0.0 ? out.expected[a] / out.total_weight : 0.0;
  }
  return out;
}

SweepTable sweep(const ChoiceDataset& data, const ModelSpec& spec, const NaturalParams& params,
                 const Scenario& scenario) {
  scenario.validate(data);
  SweepTable table;
  table.model = spec.label();
  table.parameter = scenario.sweep ? scenario.sweep->parameter : "value";
  const std::vector<double> grid = scenario.sweep ? scenario.sweep->values : std::vector<double>{0.0};
  table.rows.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    table.rows[k] = enumerate_shares(data, spec, params, scenario, grid[k]);
  });
  return table;
}

std::string sweep_csv(const std::vector<SweepTable>& tables) {
  const std::string parameter = tables.empty() ? "value" : tables.front().parameter;
  std::string out = "model," + csv_field(parameter) + ",alt_id,expected,share\n";
  for (const auto& t : tables) {
    for (const auto& row : t.rows) {
      for (const auto& [alt, expected] : row.expected) {
        out += csv_field(t.model) + "," + format_double(row.sweep_value) + "," + std::to_string(alt) + "," +
               format_double(expected) + "," + format_double(row.share.at(alt)) + "\n";
      }
    }
  }
  return out;
}

TargetingResult rank_targets(const ChoiceDataset& data, const TargetingProblem& problem) {
  const std::size_t cost_col = data.require_column(problem.cost_column);
  if (!data.alt_index(problem.target_alt)) {
    throw Error(ErrorCode::SpecDataMismatch, "target alternative " + std::to_string(problem.target_alt) +
                                                 " does not occur in the data");
  }
  if (!(problem.pass_multiplier >= 0.0)) throw Error(ErrorCode::InvalidArgument, "pass multiplier must be >= 0");

  Scenario pass;
  pass.name = "pass";
  Edit free_target;
  free_target.where.alts = {problem.target_alt};
  free_target.column = problem.cost_column;
  free_target.op = EditOp::Set;
  free_target.amount.value = 0.0;
  pass.edits.push_back(free_target);
  if (!problem.related_alts.empty()) {
    Edit related;
    related.where.alts = problem.related_alts;
    related.column = problem.cost_column;
    related.op = EditOp::SubtractFloor0;
    related.amount.column = problem.cost_column;
    related.amount.from_alt = problem.target_alt;
    pass.edits.push_back(related);
  }
  const auto edited = apply_scenario(data, pass);

  auto delta = [&](const FittedModel& m) {
    const auto before = probabilities(data, m.spec, m.params);
    const auto after = probabilities(edited, m.spec, m.params);
    std::vector<double> d(data.n_obs(), 0.0);
    for (std::size_t i = 0; i < data.n_obs(); ++i) {
      if (const auto r = row_of(data, i, problem.target_alt)) d[i] = after[*r] - before[*r];
    }
    return d;
  };
  const auto d_sel = delta(problem.selection);
  const auto d_truth = delta(problem.truth);

  TargetingResult out;
  for (std::size_t i = 0; i < data.n_obs(); ++i) {
    const auto r = row_of(data, i, problem.target_alt);
    const double cost = r ? problem.pass_multiplier * data.x(*r, cost_col) : 0.0;
    if (!r || !(cost > 0.0)) {
      ++out.excluded;
      continue;
    }
    out.rows.push_back({data.observation(i).id, d_sel[i], d_truth[i], cost, 0, false});
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const TargetRow& a, const TargetRow& b) {
    const double ra = a.delta_p / a.cost;
    const double rb = b.delta_p / b.cost;
    if (ra != rb) return ra > rb;
    return a.obs_id < b.obs_id;
  });
  for (std::size_t k = 0; k < out.rows.size(); ++k) out.rows[k].rank = k + 1;
  return out;
}

TargetingResult select_targets(const TargetingResult& ranked, double budget, bool skip_unaffordable) {
  if (!(budget > 0.0)) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
  TargetingResult out = ranked;
  out.budget = budget;
  out.n_selected = 0;
  out.total_cost = 0.0;
  out.truth_gain = 0.0;
  for (auto& row : out.rows) {
    row.selected = false;
    if (out.total_cost + row.cost > budget) {
      if (skip_unaffordable) continue;
      break;
    }
    row.selected = true;
    out.total_cost += row.cost;
    out.truth_gain += row.delta_p_truth;
    ++out.n_selected;
  }
  if (out.n_selected == 0) {
    throw Error(ErrorCode::EmptySelection, "budget " + format_double(budget) + " cannot cover the first individual");
  }
  out.efficiency = out.total_cost / out.truth_gain;
  return out;
}

TargetingResult select_targets(const ChoiceDataset& data, const TargetingProblem& problem, double budget) {
  return select_targets(rank_targets(data, problem), budget, problem.skip_unaffordable);
}

std::string targeting_csv(const std::vector<TargetingResult>& results) {
  std::string out = "budget,obs_id,delta_p,delta_p_truth,cost,rank,selected\n";
  for (const auto& res : results) {
    for (const auto& r : res.rows) {
      out += format_double(res.budget) + "," + std::to_string(r.obs_id) + "," + format_double(r.delta_p) + "," +
             format_double(r.delta_p_truth) + "," + format_double(r.cost) + "," + std::to_string(r.rank) + "," +
             (r.selected ? "1" : "0") + "\n";
    }
  }
  return out;
}

std::string targeting_summary_csv(const std::vector<TargetingResult>& results) {
  std::string out = "budget,n_selected,total_cost,truth_gain,efficiency\n";
  for (const auto& res : results) {
    out += format_double(res.budget) + "," + std::to_string(res.n_selected) + "," + format_double(res.total_cost) +
           "," + format_double(res.truth_gain) + "," + format_double(res.efficiency) + "\n";
  }
  return out;
}

}  // namespace logitype
