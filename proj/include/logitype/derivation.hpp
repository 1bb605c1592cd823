#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace logitype {

/// Derivatives with respect to V of the partial losses of a composite loss:
/// L1 is charged when the observation picks outcome 1, L2 otherwise.
struct PartialLossPair {
  std::function<double(double)> d_loss1;
  std::function<double(double)> d_loss2;
};

/// The probability implied by a composite loss, P = L2' / (L2' - L1').
/// Throws DegenerateDenominator.
double prob_from_composite(const PartialLossPair& pair, double v);

/// Log-loss of the binary logit: L1' = -1/(1+e^V), L2' = e^V/(1+e^V).
PartialLossPair log_loss_partials();
/// Uneven log-loss: L1' = -1/(1+e^V), L2' = 1/(1+e^-gV).
PartialLossPair uneven_log_loss_partials(double gamma);

/// dL2/dp of a class-probability-estimation loss. The branch used for V >= 0
/// and the one for V < 0 may differ, which is how kinked models are handled.
struct CpeLoss {
  std::function<double(double)> upper;
  std::function<double(double)> lower;
};

/// Negative log-likelihood: dL2/dp = 1/(1-p) on both sides.
CpeLoss negative_log_likelihood();
/// Asymmetric negative log-likelihood with shape g in (0, 1):
/// upper (-1/ln g)/(1-p), lower (-1/ln(1-g))/(1-p).
CpeLoss asymmetric_negative_log_likelihood(double gamma);

/// Solves p'(V) = p / L2'(p) with p(0) = p0, integrating outward from 0 on
/// each side with adaptive Dormand-Prince steps (tolerance 1e-10). Returns
/// p at every grid point, in input order. Throws IntegrationFailure.
std::vector<double> prob_from_cpe(const CpeLoss& loss, double p0, std::span<const double> grid);

/// Binary asymmetric logit with the reference alternative at V = 0.
double binary_asym_logit(double v, double gamma);

}  // namespace logitype
