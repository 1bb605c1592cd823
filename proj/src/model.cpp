#include "logitype/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "logitype/error.hpp"

namespace logitype {

std::string ModelSpec::label() const { return name.empty() ? std::string(family().name()) : name; }

namespace {

std::size_t index_of(std::span<const AltId> alts, AltId alt, const char* role) {
  const auto it = std::find(alts.begin(), alts.end(), alt);
  if (it == alts.end()) {
    throw Error(ErrorCode::SpecDataMismatch, std::string(role) + " " + std::to_string(alt) + " is not an alternative in the data");
  }
  return static_cast<std::size_t>(it - alts.begin());
}

}  // namespace

ParameterLayout::ParameterLayout(const ModelSpec& spec, std::span<const AltId> alternatives)
    : family_(spec.family()), alternatives_(alternatives.begin(), alternatives.end()) {
  if (alternatives_.size() < 2) throw Error(ErrorCode::SpecDataMismatch, "need at least two alternatives");
  n_beta_ = spec.coefficients.size();
  for (const auto& c : spec.coefficients) beta_names_.push_back(c.name);
  ref_index_ = index_of(alternatives_, spec.ref_alt, "ref_alt");
  shape_ref_index_ = index_of(alternatives_, spec.shape_ref_alt.value_or(spec.ref_alt), "shape_ref_alt");
  for (std::size_t j = 0; j < alternatives_.size(); ++j) {
    if (j != ref_index_) tau_alts_.push_back(j);
  }
  const std::size_t k = family_.shapes_per_alt();
  for (std::size_t j = 0; j < alternatives_.size(); ++j) {
    if (family_.id() == Family::AsymLogit && j == shape_ref_index_) continue;
    for (std::size_t c = 0; c < k; ++c) shape_slots_.emplace_back(j, c);
  }
}

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (const auto& b : beta_names_) out.push_back("beta_" + b);
  for (std::size_t j : tau_alts_) out.push_back("tau_" + std::to_string(alternatives_[j]));
  const bool two = family_.shapes_per_alt() == 2;
  const std::string stem = family_.id() == Family::AsymLogit ? "phi" : "upsilon";
  for (auto [j, c] : shape_slots_) {
    out.push_back(stem + (two ? std::to_string(c + 1) : std::string()) + "_" + std::to_string(alternatives_[j]));
  }
  return out;
}

NaturalParams ParameterLayout::unpack(std::span<const double> packed) const {
  if (packed.size() != size()) {
    throw Error(ErrorCode::InvalidParams, "packed vector has " + std::to_string(packed.size()) +
                                              " entries, layout expects " + std::to_string(size()));
  }
  const std::size_t J = alternatives_.size();
  const std::size_t k = family_.shapes_per_alt();
  NaturalParams p;
  p.beta.assign(packed.begin(), packed.begin() + static_cast<std::ptrdiff_t>(n_beta_));
  p.tau.assign(J, 0.0);
  for (std::size_t t = 0; t < tau_alts_.size(); ++t) p.tau[tau_alts_[t]] = packed[tau_offset() + t];
  p.shape.assign(J, std::vector<double>(k, 0.0));
  if (k > 0) {
    std::vector<double> raw(J * k, 0.0);
    for (std::size_t s = 0; s < shape_slots_.size(); ++s) {
      const auto [j, c] = shape_slots_[s];
      raw[j * k + c] = packed[shape_offset() + s];
    }
    const auto natural = family_.to_natural(raw);
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t c = 0; c < k; ++c) p.shape[j][c] = natural[j * k + c];
    }
  }
  return p;
}

std::vector<double> ParameterLayout::pack(const NaturalParams& params) const {
  validate(params);
  const std::size_t J = alternatives_.size();
  const std::size_t k = family_.shapes_per_alt();
  std::vector<double> out(size(), 0.0);
  std::copy(params.beta.begin(), params.beta.end(), out.begin());
  for (std::size_t t = 0; t < tau_alts_.size(); ++t) out[tau_offset() + t] = params.tau[tau_alts_[t]];
  if (k > 0) {
    std::vector<double> natural(J * k);
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t c = 0; c < k; ++c) natural[j * k + c] = params.shape[j][c];
    }
    const auto raw = family_.from_natural(natural, shape_ref_index_);
    for (std::size_t s = 0; s < shape_slots_.size(); ++s) {
      const auto [j, c] = shape_slots_[s];
      out[shape_offset() + s] = raw[j * k + c];
    }
  }
  return out;
}

void ParameterLayout::validate(const NaturalParams& params) const {
  const std::size_t J = alternatives_.size();
  const std::size_t k = family_.shapes_per_alt();
  if (params.beta.size() != n_beta_) throw Error(ErrorCode::InvalidParams, "beta has the wrong length");
  if (params.tau.size() != J) throw Error(ErrorCode::InvalidParams, "tau needs one entry per alternative");
  if (params.tau[ref_index_] != 0.0) throw Error(ErrorCode::InvalidParams, "tau of ref_alt must be 0");
  for (double b : params.beta) {
    if (!std::isfinite(b)) throw Error(ErrorCode::InvalidParams, "beta is not finite");
  }
  for (double t : params.tau) {
    if (!std::isfinite(t)) throw Error(ErrorCode::InvalidParams, "tau is not finite");
  }
  if (k == 0) return;
  if (params.shape.size() != J) throw Error(ErrorCode::InvalidParams, "shape needs one entry per alternative");
  double simplex = 0.0;
  for (const auto& s : params.shape) {
    if (s.size() != k) throw Error(ErrorCode::InvalidParams, "shape vector has the wrong length");
    const double v_probe = family_.id() == Family::Weibull ? 1.0 : 0.0;
    // Only the shape constraints are checked here; V is data dependent.
    if (family_.id() != Family::Qgev) {
      if (auto bad = family_.domain_violation(v_probe, s)) {
        throw Error(ErrorCode::InvalidParams, std::string(family_.name()) + ": " + *bad);
      }
    } else if (!std::isfinite(s[0])) {
      throw Error(ErrorCode::InvalidParams, "qgev: gamma is not finite");
    }
    simplex += s[0];
  }
  if (family_.id() == Family::AsymLogit && std::abs(simplex - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidParams, "asym_logit shapes must sum to 1");
  }
}

void validate_spec(const ModelSpec& spec, const ChoiceDataset& data) {
  const auto alts = data.alternatives();
  index_of(alts, spec.ref_alt, "ref_alt");
  if (spec.shape_ref_alt) index_of(alts, *spec.shape_ref_alt, "shape_ref_alt");
  std::set<std::string> names;
  for (const auto& c : spec.coefficients) {
    if (!data.column_index(c.column)) {
      throw Error(ErrorCode::SpecDataMismatch, "coefficient '" + c.name + "' uses missing column '" + c.column + "'");
    }
    if (!names.insert(c.name).second) {
      throw Error(ErrorCode::SpecDataMismatch, "coefficient name '" + c.name + "' is repeated");
    }
    for (AltId a : c.alts) index_of(alts, a, ("coefficient '" + c.name + "' alternative").c_str());
  }
}

}  // namespace logitype
