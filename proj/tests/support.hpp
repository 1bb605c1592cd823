#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "logitype/choice_data.hpp"
#include "logitype/likelihood.hpp"
#include "logitype/model.hpp"
#include "logitype/random.hpp"
#include "logitype/transforms.hpp"

namespace testing {

using namespace logitype;

struct Instance {
  ChoiceDataset data;
  ModelSpec spec;
  NaturalParams params;
};

// Random dataset + parameters with every V inside the family's domain.
// Alternatives are 1..J; some observations drop alternatives so choice sets vary.
inline Instance random_instance(Family family, std::size_t J, std::size_t N, std::uint64_t seed) {
  Rng rng(seed, 7);
  const TransformFamily f(family);
  const bool positive = f.restricted() && family != Family::Czado;
  const double lo = family == Family::Pareto ? 1.5 : (positive ? 0.2 : -2.0);
  const double hi = positive ? 3.0 : 2.0;

  Instance inst;
  inst.spec.transform = family;
  inst.spec.ref_alt = 1;
  inst.spec.coefficients = {{"x1", "x1", {}}, {"x2", "x2", {2}}};
  inst.params.beta = positive ? std::vector<double>{rng.uniform(0.8, 1.2), rng.uniform(0.1, 0.8)}
                              : std::vector<double>{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  inst.params.tau.assign(J, 0.0);
  for (std::size_t j = 1; j < J; ++j) inst.params.tau[j] = rng.uniform(-1.0, 1.0);
  const std::size_t k = f.shapes_per_alt();
  inst.params.shape.assign(J, std::vector<double>(k));
  double total = 0.0;
  for (auto& s : inst.params.shape) {
    for (double& g : s) {
      switch (family) {
        case Family::AsymLogit: g = rng.uniform(0.2, 1.0); break;
        case Family::Qgev: g = rng.uniform(1.2, 3.0); break;
        default: g = std::exp(rng.uniform(-1.0, 1.0));
      }
    }
    if (k) total += s[0];
  }
  if (family == Family::AsymLogit) {
    for (auto& s : inst.params.shape) s[0] /= total;
  }

  std::vector<ChoiceRow> rows;
  std::vector<AltId> alts;
  for (std::size_t j = 1; j <= J; ++j) alts.push_back(static_cast<AltId>(j));
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<AltId> present;
    for (AltId a : alts) {
      if (a <= 2 || rng.uniform() < 0.8) present.push_back(a);
    }
    const std::size_t chosen = rng.below(present.size());
    const double weight = 1.0 + rng.uniform();
    for (std::size_t r = 0; r < present.size(); ++r) {
      double x1 = rng.uniform(lo, hi);
      double x2 = rng.uniform(positive ? 0.0 : -2.0, 2.0);
      if (family == Family::AsymLogit) {
        // Keep V away from the kink at 0.
        double v = inst.params.beta[0] * x1 + (present[r] == 2 ? inst.params.beta[1] * x2 : 0.0);
        while (std::abs(v) < 1e-3) {
          x1 = rng.uniform(lo, hi);
          v = inst.params.beta[0] * x1 + (present[r] == 2 ? inst.params.beta[1] * x2 : 0.0);
        }
      }
      rows.push_back({static_cast<ObsId>(i), present[r], r == chosen, weight, {x1, x2}});
    }
  }
  inst.data = ChoiceDataset::from_rows({"x1", "x2"}, rows, alts);
  return inst;
}

// Largest relative gap between the analytic gradient and central differences
// of the log-likelihood in packed coordinates.
inline double gradient_error(const Instance& inst, bool use_weights = false) {
  const LikelihoodKernel kernel(inst.data, inst.spec);
  const auto packed = kernel.layout().pack(inst.params);
  const auto analytic = kernel.gradient(kernel.layout().unpack(packed), use_weights);
  double worst = 0.0;
  for (std::size_t m = 0; m < packed.size(); ++m) {
    const double h = 1e-5 * std::max(1.0, std::abs(packed[m]));
    auto up = packed, down = packed;
    up[m] += h;
    down[m] -= h;
    const double numeric = (kernel.log_likelihood(kernel.layout().unpack(up), use_weights) -
                            kernel.log_likelihood(kernel.layout().unpack(down), use_weights)) /
                           (2.0 * h);
    worst = std::max(worst, std::abs(analytic[m] - numeric) / std::max(1.0, std::abs(numeric)));
  }
  return worst;
}

}  // namespace testing
