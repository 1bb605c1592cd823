#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "logitype/choice_data.hpp"
#include "logitype/model.hpp"

namespace logitype {

/// Draws one covariate column independently for every row.
struct CovariateGenerator {
  enum class Kind { Uniform, Normal, Constant };
  std::string column;
  Kind kind = Kind::Uniform;
  double a = 0.0;  // lower bound, mean or the constant
  double b = 1.0;  // upper bound or standard deviation
  /// Per-alternative overrides of (a, b).
  std::map<AltId, std::pair<double, double>> per_alt;
};

struct SimulationConfig {
  ModelSpec spec;
  NaturalParams true_params;  // indexed by position in `alternatives`
  std::vector<AltId> alternatives;
  std::size_t n_obs = 0;
  std::uint64_t seed = 0;
  std::vector<CovariateGenerator> covariates;
  /// Probability that an alternative is in an observation's choice set
  /// (1 when absent). Sets that come out smaller than two are topped up
  /// with the lowest-id missing alternatives.
  std::map<AltId, double> availability;
};

/// Draws covariates and then one choice per observation from the model's
/// probabilities. Observation i uses the stream Rng(seed, i), so the output
/// depends only on the config. Throws InvalidParams / InvalidArgument.
ChoiceDataset simulate(const SimulationConfig& config);

}  // namespace logitype
