#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "logitype/choice_data.hpp"
#include "logitype/estimation.hpp"
#include "logitype/model.hpp"

namespace logitype {

/// Selects rows by alternative, observation and covariate conditions; empty
/// lists match everything.
struct RowPredicate {
  struct Condition {
    enum class Op { Lt, Le, Gt, Ge, Eq, Ne };
    std::string column;
    Op op = Op::Eq;
    double value = 0.0;
  };
  std::vector<AltId> alts;
  std::vector<ObsId> obs;
  std::vector<Condition> where;

  bool matches(const ChoiceDataset& data, std::size_t obs_index, std::size_t row) const;
};

/// amount = value * (sweep value if scaled) * (column, if given). The column
/// is read from the same row, or from alternative `from_alt`'s row of the
/// same observation (the edit is skipped where that row is absent). Amounts
/// always read the unedited data.
struct Amount {
  double value = 1.0;
  bool times_sweep = false;
  std::optional<std::string> column;
  std::optional<AltId> from_alt;
};

enum class EditOp { Add, Multiply, Set, SubtractFloor0 };

struct Edit {
  RowPredicate where;
  std::string column;
  EditOp op = EditOp::Add;
  Amount amount;
};

struct SweepGrid {
  std::string parameter;
  std::vector<double> values;  // strictly increasing
};

struct Scenario {
  std::string name;
  std::vector<Edit> edits;
  std::optional<SweepGrid> sweep;

  /// Throws MissingColumn / InvalidArgument.
  void validate(const ChoiceDataset& data) const;
};

/// A copy of `data` with the scenario's edits applied at `sweep_value`.
ChoiceDataset apply_scenario(const ChoiceDataset& data, const Scenario& scenario, double sweep_value = 0.0);

struct ShareResult {
  double sweep_value = 0.0;
  std::map<AltId, double> expected;  // sum_i w_i P_ij
  std::map<AltId, double> share;     // expected / sum_i w_i
  double total_weight = 0.0;
};

/// Sample enumeration under a scenario.
ShareResult enumerate_shares(const ChoiceDataset& data, const ModelSpec& spec, const NaturalParams& params,
                             const Scenario& scenario, double sweep_value = 0.0);

struct SweepTable {
  std::string model;
  std::string parameter;
  std::vector<ShareResult> rows;  // one per grid value
};

/// enumerate_shares at every grid value (a single row at 0 without a grid).
SweepTable sweep(const ChoiceDataset& data, const ModelSpec& spec, const NaturalParams& params,
                 const Scenario& scenario);

/// Long format: model, <parameter>, alt_id, expected, share.
std::string sweep_csv(const std::vector<SweepTable>& tables);

struct FittedModel {
  ModelSpec spec;
  NaturalParams params;

  static FittedModel from(const EstimationResult& r) { return {r.spec, r.mle}; }
};

/// Individualized marketing of a pass that makes `target_alt` free.
struct TargetingProblem {
  FittedModel selection;
  FittedModel truth;
  AltId target_alt = 0;
  std::string cost_column = "cost";
  /// Alternatives whose cost drops by the target's fare, floored at 0.
  std::vector<AltId> related_alts;
  double pass_multiplier = 22.0;  // pass cost = multiplier * target fare
  /// Keep scanning past an unaffordable individual instead of stopping.
  bool skip_unaffordable = false;
};

struct TargetRow {
  ObsId obs_id = 0;
  double delta_p = 0.0;        // selection model
  double delta_p_truth = 0.0;  // truth model
  double cost = 0.0;
  std::size_t rank = 0;  // 1-based
  bool selected = false;
};

struct TargetingResult {
  double budget = 0.0;
  std::vector<TargetRow> rows;  // in rank order
  std::size_t n_selected = 0;
  double total_cost = 0.0;
  double truth_gain = 0.0;  // sum of truth delta_p over the selection
  double efficiency = 0.0;  // total_cost / truth_gain
  std::size_t excluded = 0; // observations without the target or with zero cost
};

/// Per-observation delta_p and costs, ranked by delta_p / cost descending
/// (ties by ascending obs_id). Observations lacking the target alternative
/// or with a non-positive pass cost are excluded.
TargetingResult rank_targets(const ChoiceDataset& data, const TargetingProblem& problem);

/// Greedy prefix of the ranking within `budget`. Throws EmptySelection when
/// nobody can be afforded, InvalidArgument when budget <= 0.
TargetingResult select_targets(const ChoiceDataset& data, const TargetingProblem& problem, double budget);
TargetingResult select_targets(const TargetingResult& ranked, double budget, bool skip_unaffordable = false);

/// budget, obs_id, delta_p, delta_p_truth, cost, rank, selected.
std::string targeting_csv(const std::vector<TargetingResult>& results);
/// budget, n_selected, total_cost, truth_gain, efficiency.
std::string targeting_summary_csv(const std::vector<TargetingResult>& results);

}  // namespace logitype
