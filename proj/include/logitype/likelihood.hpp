#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "logitype/choice_data.hpp"
#include "logitype/model.hpp"

namespace logitype {

/// Chosen probabilities are floored here before taking logs.
inline constexpr double kProbabilityFloor = 1e-300;

struct LikelihoodValue {
  double ll = 0.0;
  std::vector<double> gradient;  // packed order; empty when not requested
  std::size_t floored = 0;       // observations hitting kProbabilityFloor
};

/// Evaluates a logit-type model on one dataset.
///
/// Per observation, S_ij = tau_j + S(V_ij, gamma_j) with V_ij = x_ij . beta,
/// and probabilities use max-subtracted exponentiation. Observations are
/// reduced in fixed-size chunks followed by pairwise summation, so results do
/// not depend on scheduling. The kernel keeps a reference to `data`.
class LikelihoodKernel {
 public:
  LikelihoodKernel(const ChoiceDataset& data, const ModelSpec& spec);

  const ChoiceDataset& data() const { return *data_; }
  const ModelSpec& spec() const { return spec_; }
  const ParameterLayout& layout() const { return layout_; }

  /// V_ij for every row. Throws NonFiniteIndex.
  std::vector<double> index(const NaturalParams& params) const;

  /// P_ij for every row. Throws DomainViolation / NonFiniteIndex.
  std::vector<double> probabilities(const NaturalParams& params) const;

  double log_likelihood(const NaturalParams& params, bool use_weights = false) const;

  /// Log-likelihood plus its gradient with respect to the packed vector.
  LikelihoodValue evaluate(const NaturalParams& params, bool use_weights = false, bool with_gradient = true) const;

  std::vector<double> gradient(const NaturalParams& params, bool use_weights = false) const {
    return evaluate(params, use_weights, true).gradient;
  }

  /// LL_j = sum over observations choosing j of w_i ln P_ij.
  std::map<AltId, double> ll_by_alternative(const NaturalParams& params, bool use_weights = false) const;

  /// Per-observation ln P_{i, chosen}.
  std::vector<double> chosen_log_probabilities(const NaturalParams& params) const;

 private:
  void row_terms(const NaturalParams& params, std::size_t obs, std::vector<double>& v,
                 std::vector<double>& s) const;

  const ChoiceDataset* data_;
  ModelSpec spec_;
  ParameterLayout layout_;
  TransformFamily family_;
  std::vector<std::size_t> coef_columns_;
  std::vector<std::vector<unsigned char>> coef_applies_;  // [coef][alt index]
};

std::vector<double> probabilities(const ChoiceDataset& data, const ModelSpec& spec, const NaturalParams& params);
double log_likelihood(const ChoiceDataset& data, const ModelSpec& spec, const NaturalParams& params,
                      bool use_weights = false);
std::vector<double> gradient(const ChoiceDataset& data, const ModelSpec& spec, const NaturalParams& params,
                             bool use_weights = false);
std::map<AltId, double> ll_by_alternative(const ChoiceDataset& data, const ModelSpec& spec,
                                          const NaturalParams& params, bool use_weights = false);

/// Hessian of the log-likelihood in packed coordinates from central
/// differences of the analytic gradient, step 1e-5 * max(1, |theta_m|),
/// symmetrised.
Eigen::MatrixXd finite_difference_hessian(const LikelihoodKernel& kernel, std::span<const double> packed,
                                          bool use_weights = false);

}  // namespace logitype
