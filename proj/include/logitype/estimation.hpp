#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "logitype/choice_data.hpp"
#include "logitype/model.hpp"

namespace logitype {

struct EstimationOptions {
  double tol_grad = 1e-5;  // on the infinity norm of the packed gradient
  double tol_ll = 1e-9;    // relative change between accepted iterates
  std::size_t max_iter = 500;  // per optimizer stage
  std::size_t multistart = 0;  // extra random starts around the initial point
  double multistart_scale = 0.5;
  std::uint64_t seed = 0;
  bool use_weights = false;
  bool compute_hessian = true;
  /// Packed coordinates held at their initial values (empty = all free).
  std::vector<unsigned char> fixed;
};

enum class FitStatus { Converged, MaxIters, LineSearchFailed };
enum class Optimizer { Bfgs, Newton, GradientAscent };
std::string_view to_string(FitStatus status);
std::string_view to_string(Optimizer optimizer);

struct EstimationResult {
  ModelSpec spec;
  std::vector<AltId> alternatives;
  std::vector<std::string> names;  // packed parameter labels
  NaturalParams mle;
  std::vector<double> packed_mle;
  double ll = 0.0;
  std::map<AltId, double> ll_by_alt;
  double grad_norm_inf = 0.0;  // over free coordinates
  Eigen::MatrixXd hessian;     // empty unless requested
  FitStatus status = FitStatus::MaxIters;
  std::size_t iterations = 0;
  Optimizer optimizer_used = Optimizer::Bfgs;
  std::vector<double> ll_history;  // LL after every accepted iterate
  std::size_t floored = 0;
  std::vector<std::string> warnings;

  std::size_t n_fixed = 0;

  bool converged() const { return status == FitStatus::Converged; }
  std::size_t free_parameters() const { return packed_mle.size() - n_fixed; }
};

/// beta = 0, tau_j = ln(share_j / share_ref) and symmetric shapes (all
/// unconstrained shape entries 0). Alternatives that are never chosen get
/// tau = 0 and a warning.
std::vector<double> default_init(const ChoiceDataset& data, const ModelSpec& spec, bool use_weights = false,
                                 std::vector<std::string>* warnings = nullptr);

/// Maximum likelihood over the packed vector: BFGS, then Newton on a
/// finite-difference Hessian, then gradient ascent, each stage starting
/// where the previous one stopped. Points outside the transform's domain
/// score -inf. Throws SpecDataMismatch / NonFiniteObjectiveAtInit.
EstimationResult fit(const ChoiceDataset& data, const ModelSpec& spec,
                     const std::optional<std::vector<double>>& init = std::nullopt,
                     const EstimationOptions& options = {});

}  // namespace logitype
