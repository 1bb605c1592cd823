#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "logitype/choice_data.hpp"
#include "logitype/estimation.hpp"
#include "logitype/inference.hpp"
#include "logitype/model.hpp"
#include "logitype/policy.hpp"
#include "logitype/simulate.hpp"

// JSON configuration files. The formats are described in docs/config.md.
// Every parser throws ConfigError naming the file and the offending key.

namespace logitype {

Schema load_schema(const std::filesystem::path& path);
ModelSpec load_spec(const std::filesystem::path& path);

struct RunOptions {
  EstimationOptions fit;
  BootstrapOptions bootstrap;
};
RunOptions load_options(const std::filesystem::path& path);

/// Natural parameters given by coefficient name and alternative id. Missing
/// taus are 0 and missing shapes take their value at a zero packed entry.
NaturalParams natural_params_from_json(const std::string& json_text, const ModelSpec& spec,
                                       const std::vector<AltId>& alternatives);

/// The simulation file carries the spec inline or as a path relative to the file.
SimulationConfig load_simulation(const std::filesystem::path& path);

Scenario load_scenario(const std::filesystem::path& path);

struct TargetingConfig {
  AltId target_alt = 0;
  std::string cost_column = "cost";
  std::vector<AltId> related_alts;
  double pass_multiplier = 22.0;
  bool skip_unaffordable = false;
  std::vector<double> budgets;
};
TargetingConfig load_targeting(const std::filesystem::path& path);

/// A fitted model as written by `estimate` (params.json).
struct SavedFit {
  ModelSpec spec;
  std::vector<AltId> alternatives;
  std::vector<double> packed;
};
std::string saved_fit_json(const EstimationResult& result);
/// Returns nullopt when the file is a plain spec rather than a saved fit.
std::optional<SavedFit> load_saved_fit(const std::filesystem::path& path);

std::string spec_json(const ModelSpec& spec);

}  // namespace logitype
