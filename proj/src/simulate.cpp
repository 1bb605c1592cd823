#include "logitype/simulate.hpp"

#include <algorithm>
#include <tuple>

#include "logitype/error.hpp"
#include "logitype/likelihood.hpp"
#include "logitype/random.hpp"

namespace logitype {

ChoiceDataset simulate(const SimulationConfig& config) {
  if (config.n_obs == 0) throw Error(ErrorCode::InvalidArgument, "n_obs must be at least 1");
  std::vector<AltId> alts = config.alternatives;
  std::sort(alts.begin(), alts.end());
  if (alts.size() < 2 || std::adjacent_find(alts.begin(), alts.end()) != alts.end()) {
    throw Error(ErrorCode::InvalidArgument, "need at least two distinct alternatives");
  }
  if (alts != config.alternatives) {
    throw Error(ErrorCode::InvalidArgument, "alternatives must be listed in ascending order");
  }
  ParameterLayout(config.spec, alts).validate(config.true_params);

  std::vector<std::string> columns;
  for (const auto& g : config.covariates) columns.push_back(g.column);
  for (const auto& c : config.spec.coefficients) {
    if (std::find(columns.begin(), columns.end(), c.column) == columns.end()) {
      throw Error(ErrorCode::InvalidArgument, "no generator for column '" + c.column + "'");
    }
  }

  std::vector<ChoiceRow> rows;
  std::vector<double> draws(config.n_obs);
  for (std::size_t i = 0; i < config.n_obs; ++i) {
    Rng rng(config.seed, i);
    std::vector<AltId> present;
    for (AltId a : alts) {
      const auto it = config.availability.find(a);
      const double p = it == config.availability.end() ? 1.0 : it->second;
      if (rng.uniform() < p) present.push_back(a);
    }
    for (AltId a : alts) {
      if (present.size() >= 2) break;
      if (std::find(present.begin(), present.end(), a) == present.end()) present.push_back(a);
    }
    std::sort(present.begin(), present.end());
    for (std::size_t k = 0; k < present.size(); ++k) {
      ChoiceRow row;
      row.obs_id = static_cast<ObsId>(i);
      row.alt_id = present[k];
      row.chosen = k == 0;  // placeholder until the draw below
      for (const auto& g : config.covariates) {
        double a = g.a, b = g.b;
        if (const auto it = g.per_alt.find(present[k]); it != g.per_alt.end()) std::tie(a, b) = it->second;
        switch (g.kind) {
          case CovariateGenerator::Kind::Uniform: row.covariates.push_back(rng.uniform(a, b)); break;
          case CovariateGenerator::Kind::Normal: row.covariates.push_back(rng.normal(a, b)); break;
          case CovariateGenerator::Kind::Constant: row.covariates.push_back(a); break;
        }
      }
      rows.push_back(std::move(row));
    }
    draws[i] = rng.uniform();
  }

  ChoiceDataset draft = ChoiceDataset::from_rows(columns, rows, alts);
  const auto probs = LikelihoodKernel(draft, config.spec).probabilities(config.true_params);
  for (std::size_t i = 0; i < draft.n_obs(); ++i) {
    const auto& o = draft.observation(i);
    std::size_t pick = o.end - 1;
    double cumulative = 0.0;
    for (std::size_t r = o.begin; r < o.end; ++r) {
      cumulative += probs[r];
      if (draws[i] < cumulative) {
        pick = r;
        break;
      }
    }
    for (std::size_t r = o.begin; r < o.end; ++r) rows[r].chosen = r == pick;
  }
  return ChoiceDataset::from_rows(std::move(columns), std::move(rows), alts);
}

}  // namespace logitype
