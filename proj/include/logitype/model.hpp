#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logitype/choice_data.hpp"
#include "logitype/transforms.hpp"

namespace logitype {

/// One index coefficient: beta_k multiplies `column` on rows whose
/// alternative is in `alts` (all alternatives when empty). A shared
/// coefficient lists no alts; an alternative-specific one lists a single alt.
struct Coefficient {
  std::string name;
  std::string column;
  std::vector<AltId> alts;
};

struct ModelSpec {
  std::string name;  // report label; transform name when empty
  Family transform = Family::Mnl;
  AltId ref_alt = 0;                   // tau fixed at 0
  std::optional<AltId> shape_ref_alt;  // asym_logit only; defaults to ref_alt
  std::vector<Coefficient> coefficients;

  std::string label() const;
  TransformFamily family() const { return TransformFamily(transform); }
};

/// theta = (beta, tau, gamma) in natural units. tau and shape are indexed by
/// position in the dataset's sorted alternative list.
struct NaturalParams {
  std::vector<double> beta;
  std::vector<double> tau;
  std::vector<std::vector<double>> shape;
};

/// Packs natural parameters into the unconstrained optimizer vector:
///
///   [ beta (spec order) | tau (alternatives except ref_alt, ascending id) |
///     shapes (ascending alt id, component-major within an alternative,
///             skipping shape_ref_alt for asym_logit) ]
///
/// Any real vector unpacks to admissible natural parameters.
class ParameterLayout {
 public:
  ParameterLayout(const ModelSpec& spec, std::span<const AltId> alternatives);

  std::size_t size() const { return n_beta_ + tau_alts_.size() + shape_slots_.size(); }
  std::size_t n_beta() const { return n_beta_; }
  std::size_t n_tau() const { return tau_alts_.size(); }
  std::size_t n_shape() const { return shape_slots_.size(); }
  std::size_t tau_offset() const { return n_beta_; }
  std::size_t shape_offset() const { return n_beta_ + tau_alts_.size(); }
  std::size_t n_alternatives() const { return alternatives_.size(); }

  /// Alternative index for each free tau.
  const std::vector<std::size_t>& tau_alts() const { return tau_alts_; }
  /// (alternative index, shape component) for each free shape entry.
  const std::vector<std::pair<std::size_t, std::size_t>>& shape_slots() const { return shape_slots_; }
  std::size_t ref_index() const { return ref_index_; }
  std::size_t shape_ref_index() const { return shape_ref_index_; }
  TransformFamily family() const { return family_; }

  /// Labels such as "beta_cost", "tau_2", "upsilon_3", "phi_3".
  std::vector<std::string> names() const;

  NaturalParams unpack(std::span<const double> packed) const;
  /// Throws InvalidParams if the natural values cannot be represented.
  std::vector<double> pack(const NaturalParams& params) const;

  /// Checks sizes, tau_ref = 0 and the family's shape constraints.
  void validate(const NaturalParams& params) const;

 private:
  TransformFamily family_;
  std::vector<AltId> alternatives_;
  std::vector<std::string> beta_names_;
  std::size_t n_beta_ = 0;
  std::size_t ref_index_ = 0;
  std::size_t shape_ref_index_ = 0;
  std::vector<std::size_t> tau_alts_;
  std::vector<std::pair<std::size_t, std::size_t>> shape_slots_;
};

/// Checks that the spec's reference alternatives and columns exist in `data`.
/// Throws SpecDataMismatch.
void validate_spec(const ModelSpec& spec, const ChoiceDataset& data);

}  // namespace logitype
