#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace logitype {

enum class Family {
  Mnl,
  Cloglog,
  Scobit,
  UnevenLogit,
  AsymLogit,
  // Restricted-domain special cases.
  Exponential,
  Rayleigh,
  Weibull,
  Pareto,
  Qgev,
  Czado,
};

/// Derivatives of S with respect to its shape vector (unused slots are 0).
using ShapeGradient = std::array<double, 2>;

/// A transformation S(V, gamma) defining one logit-type model:
///
///   P_ij = exp(tau_j + S(V_ij, gamma_j)) / sum_l exp(tau_l + S(V_il, gamma_l)).
///
/// Shapes are per alternative. `J` is the global alternative count and only
/// matters for the asymmetric logit. Evaluation assumes the arguments are in
/// the family's domain; check with domain_violation() first.
class TransformFamily {
 public:
  constexpr explicit TransformFamily(Family family) : family_(family) {}

  Family id() const { return family_; }
  std::string_view name() const;

  /// Number of natural shape parameters per alternative (0, 1 or 2).
  std::size_t shapes_per_alt() const;

  /// True for the families whose S is increasing in V; the Li-type
  /// restricted models (exponential, rayleigh, weibull, pareto, q-GEV) are
  /// stated for a disutility index and decrease in V instead.
  bool increasing() const;

  /// True for the Table-6 style families that only accept part of the real line.
  bool restricted() const;

  double value(double v, std::span<const double> shape, std::size_t J = 2) const;
  double d_index(double v, std::span<const double> shape, std::size_t J = 2) const;
  ShapeGradient d_shape(double v, std::span<const double> shape, std::size_t J = 2) const;

  /// Describes the violated constraint, e.g. "V <= 1" or "gamma <= 0".
  std::optional<std::string> domain_violation(double v, std::span<const double> shape) const;

  /// Unconstrained -> natural for all J alternatives at once.
  ///
  /// `unconstrained` has J * shapes_per_alt() entries ordered by alternative.
  /// Scobit, uneven logit, weibull and czado use gamma = exp(u); q-GEV uses
  /// gamma = 1 + exp(u); the asymmetric logit uses the softmax over all J
  /// entries (the caller pins the reference entry at 0).
  std::vector<double> to_natural(std::span<const double> unconstrained) const;
  /// Inverse of to_natural; for the asymmetric logit the reference
  /// alternative `ref` is mapped to 0.
  std::vector<double> from_natural(std::span<const double> natural, std::size_t ref = 0) const;

 private:
  Family family_;
};

/// Registry lookup by name (mnl, cloglog, scobit, uneven_logit, asym_logit,
/// exponential, rayleigh, weibull, pareto, qgev, czado). Throws InvalidArgument.
TransformFamily family_by_name(std::string_view name);
std::span<const Family> all_families();

// Scalar forms of the individual transforms.
double s_mnl(double v);
double s_cloglog(double v);
double s_scobit(double v, double gamma);
double s_uneven(double v, double gamma);
double s_asym(double v, double gamma, std::size_t J);
/// Restricted families; throws DomainViolation naming the violated constraint.
double s_restricted(Family family, double v, std::span<const double> shape = {});

/// Natural shapes for the unconstrained vector (see TransformFamily::to_natural).
std::vector<double> reparam(Family family, std::span<const double> unconstrained);

// Numerically stable helpers.
double softplus(double x);     // ln(1 + e^x)
double log_expm1(double x);    // ln(e^x - 1), x > 0
double logistic(double x);     // 1 / (1 + e^-x)

}  // namespace logitype
