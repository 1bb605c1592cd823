#include "logitype/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logitype/error.hpp"
#include "logitype/parallel.hpp"

namespace logitype {

namespace {

constexpr std::size_t kChunk = 256;
const double kLogFloor = std::log(kProbabilityFloor);

/// Sums each column of a chunks x dim table pairwise over chunks.
std::vector<double> reduce_columns(const std::vector<double>& table, std::size_t n_chunks, std::size_t dim) {
  std::vector<double> out(dim);
  std::vector<double> column(n_chunks);
  for (std::size_t d = 0; d < dim; ++d) {
    for (std::size_t c = 0; c < n_chunks; ++c) column[c] = table[c * dim + d];
    out[d] = pairwise_sum(column.data(), n_chunks);
  }
  return out;
}

}  // namespace

LikelihoodKernel::LikelihoodKernel(const ChoiceDataset& data, const ModelSpec& spec)
    : data_(&data), spec_(spec), layout_(spec, data.alternatives()), family_(spec.family()) {
  validate_spec(spec, data);
  const std::size_t J = data.n_alternatives();
  for (const auto& c : spec.coefficients) {
    coef_columns_.push_back(data.require_column(c.column));
    std::vector<unsigned char> applies(J, c.alts.empty() ? 1 : 0);
    for (AltId a : c.alts) applies[*data.alt_index(a)] = 1;
    coef_applies_.push_back(std::move(applies));
  }
}

void LikelihoodKernel::row_terms(const NaturalParams& params, std::size_t obs, std::vector<double>& v,
                                 std::vector<double>& s) const {
  const auto& o = data_->observation(obs);
  const std::size_t n = o.end - o.begin;
  const std::size_t J = data_->n_alternatives();
  v.resize(n);
  s.resize(n);
  for (std::size_t r = o.begin; r < o.end; ++r) {
    const std::size_t alt = data_->row_alt_index(r);
    double index = 0.0;
    for (std::size_t k = 0; k < coef_columns_.size(); ++k) {
      if (coef_applies_[k][alt]) index += params.beta[k] * data_->x(r, coef_columns_[k]);
    }
    if (!std::isfinite(index)) {
      throw Error(ErrorCode::NonFiniteIndex, "V is not finite for obs_id " + std::to_string(o.id) +
                                                 ", alt_id " + std::to_string(data_->row_alt(r)));
    }
    const std::span<const double> shape = params.shape.empty() ? std::span<const double>() : params.shape[alt];
    if (family_.id() != Family::Mnl) {
      if (auto bad = family_.domain_violation(index, shape)) {
        throw Error(ErrorCode::DomainViolation, std::string(family_.name()) + ": " + *bad + " (obs_id " +
                                                    std::to_string(o.id) + ", alt_id " +
                                                    std::to_string(data_->row_alt(r)) + ")");
      }
    }
    v[r - o.begin] = index;
    s[r - o.begin] = params.tau[alt] + family_.value(index, shape, J);
  }
}

std::vector<double> LikelihoodKernel::index(const NaturalParams& params) const {
  layout_.validate(params);
  std::vector<double> out(data_->n_rows());
  std::vector<double> v, s;
  for (std::size_t i = 0; i < data_->n_obs(); ++i) {
    row_terms(params, i, v, s);
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(data_->observation(i).begin));
  }
  return out;
}

std::vector<double> LikelihoodKernel::probabilities(const NaturalParams& params) const {
  layout_.validate(params);
  std::vector<double> out(data_->n_rows());
  std::vector<double> v, s;
  for (std::size_t i = 0; i < data_->n_obs(); ++i) {
    row_terms(params, i, v, s);
    const double m = *std::max_element(s.begin(), s.end());
    double denom = 0.0;
    for (double& x : s) {
      x = std::exp(x - m);
      denom += x;
    }
    const std::size_t begin = data_->observation(i).begin;
    for (std::size_t k = 0; k < s.size(); ++k) out[begin + k] = s[k] / denom;
  }
  return out;
}

std::vector<double> LikelihoodKernel::chosen_log_probabilities(const NaturalParams& params) const {
  layout_.validate(params);
  std::vector<double> out(data_->n_obs());
  std::vector<double> v, s;
  for (std::size_t i = 0; i < data_->n_obs(); ++i) {
    row_terms(params, i, v, s);
    const auto& o = data_->observation(i);
    const double m = *std::max_element(s.begin(), s.end());
    double denom = 0.0;
    for (double x : s) denom += std::exp(x - m);
    out[i] = s[o.chosen_row - o.begin] - m - std::log(denom);
  }
  return out;
}

LikelihoodValue LikelihoodKernel::evaluate(const NaturalParams& params, bool use_weights, bool with_gradient) const {
  layout_.validate(params);
  const std::size_t N = data_->n_obs();
  const std::size_t J = data_->n_alternatives();
  const std::size_t K = coef_columns_.size();
  const std::size_t k_shape = family_.shapes_per_alt();
  // Natural-coordinate accumulator layout: [ll | beta | tau per alt | shape per alt].
  const std::size_t dim = 1 + (with_gradient ? K + J + J * k_shape : 0);
  const std::size_t n_chunks = std::max<std::size_t>(1, (N + kChunk - 1) / kChunk);
  std::vector<double> table(n_chunks * dim, 0.0);
  std::size_t floored = 0;

  std::vector<double> v, s, p;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    double* acc = table.data() + c * dim;
    const std::size_t stop = std::min(N, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < stop; ++i) {
      row_terms(params, i, v, s);
      const auto& o = data_->observation(i);
      const double w = use_weights ? o.weight : 1.0;
      const double m = *std::max_element(s.begin(), s.end());
      p.resize(s.size());
      double denom = 0.0;
      for (std::size_t k = 0; k < s.size(); ++k) {
        p[k] = std::exp(s[k] - m);
        denom += p[k];
      }
      const std::size_t chosen = o.chosen_row - o.begin;
      double log_p = s[chosen] - m - std::log(denom);
      if (log_p < kLogFloor) {
        log_p = kLogFloor;
        ++floored;
      }
      acc[0] += w * log_p;
      if (!with_gradient) continue;

      for (std::size_t k = 0; k < p.size(); ++k) {
        const std::size_t r = o.begin + k;
        const std::size_t alt = data_->row_alt_index(r);
        const double resid = w * ((k == chosen ? 1.0 : 0.0) - p[k] / denom);
        if (resid == 0.0) continue;
        const std::span<const double> shape =
            params.shape.empty() ? std::span<const double>() : params.shape[alt];
        if (K > 0) {
          const double dsdv = family_.d_index(v[k], shape, J);
          for (std::size_t b = 0; b < K; ++b) {
            if (coef_applies_[b][alt]) acc[1 + b] += resid * dsdv * data_->x(r, coef_columns_[b]);
          }
        }
        acc[1 + K + alt] += resid;
        if (k_shape > 0) {
          const auto ds = family_.d_shape(v[k], shape, J);
          for (std::size_t q = 0; q < k_shape; ++q) acc[1 + K + J + alt * k_shape + q] += resid * ds[q];
        }
      }
    }
  }

  const auto totals = reduce_columns(table, n_chunks, dim);
  LikelihoodValue out;
  out.ll = totals[0];
  out.floored = floored;
  if (!with_gradient) return out;

  out.gradient.assign(layout_.size(), 0.0);
  for (std::size_t b = 0; b < K; ++b) out.gradient[b] = totals[1 + b];
  const auto& tau_alts = layout_.tau_alts();
  for (std::size_t t = 0; t < tau_alts.size(); ++t) out.gradient[layout_.tau_offset() + t] = totals[1 + K + tau_alts[t]];

  if (k_shape > 0) {
    auto g_nat = [&](std::size_t alt, std::size_t q) { return totals[1 + K + J + alt * k_shape + q]; };
    const auto& slots = layout_.shape_slots();
    if (family_.id() == Family::AsymLogit) {
      double weighted = 0.0;
      for (std::size_t j = 0; j < J; ++j) weighted += g_nat(j, 0) * params.shape[j][0];
      for (std::size_t sidx = 0; sidx < slots.size(); ++sidx) {
        const std::size_t j = slots[sidx].first;
        out.gradient[layout_.shape_offset() + sidx] = params.shape[j][0] * (g_nat(j, 0) - weighted);
      }
    } else {
      for (std::size_t sidx = 0; sidx < slots.size(); ++sidx) {
        const auto [j, q] = slots[sidx];
        const double g = params.shape[j][q];
        const double jac = family_.id() == Family::Qgev ? g - 1.0 : g;
        out.gradient[layout_.shape_offset() + sidx] = g_nat(j, q) * jac;
      }
    }
  }
  return out;
}

double LikelihoodKernel::log_likelihood(const NaturalParams& params, bool use_weights) const {
  return evaluate(params, use_weights, false).ll;
}

std::map<AltId, double> LikelihoodKernel::ll_by_alternative(const NaturalParams& params, bool use_weights) const {
  const auto log_p = chosen_log_probabilities(params);
  const std::size_t J = data_->n_alternatives();
  std::vector<std::vector<double>> terms(J);
  for (std::size_t i = 0; i < data_->n_obs(); ++i) {
    const double w = use_weights ? data_->observation(i).weight : 1.0;
    terms[data_->chosen_alt_index(i)].push_back(w * std::max(log_p[i], kLogFloor));
  }
  std::map<AltId, double> out;
  for (std::size_t j = 0; j < J; ++j) out[data_->alternatives()[j]] = pairwise_sum(terms[j].data(), terms[j].size());
  return out;
}

std::vector<double> probabilities(const ChoiceDataset& data, const ModelSpec& spec, const NaturalParams& params) {
  return LikelihoodKernel(data, spec).probabilities(params);
}

double log_likelihood(const ChoiceDataset& data, const ModelSpec& spec, const NaturalParams& params,
                      bool use_weights) {
  return LikelihoodKernel(data, spec).log_likelihood(params, use_weights);
}

std::vector<double> gradient(const ChoiceDataset& data, const ModelSpec& spec, const NaturalParams& params,
                             bool use_weights) {
  return LikelihoodKernel(data, spec).gradient(params, use_weights);
}

std::map<AltId, double> ll_by_alternative(const ChoiceDataset& data, const ModelSpec& spec,
                                          const NaturalParams& params, bool use_weights) {
  return LikelihoodKernel(data, spec).ll_by_alternative(params, use_weights);
}

Eigen::MatrixXd finite_difference_hessian(const LikelihoodKernel& kernel, std::span<const double> packed,
                                          bool use_weights) {
  const std::size_t n = packed.size();
  Eigen::MatrixXd h(n, n);
  std::vector<double> theta(packed.begin(), packed.end());
  for (std::size_t m = 0; m < n; ++m) {
    const double step = 1e-5 * std::max(1.0, std::abs(theta[m]));
    const double saved = theta[m];
    theta[m] = saved + step;
    const auto up = kernel.gradient(kernel.layout().unpack(theta), use_weights);
    theta[m] = saved - step;
    const auto down = kernel.gradient(kernel.layout().unpack(theta), use_weights);
    theta[m] = saved;
    for (std::size_t r = 0; r < n; ++r) h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m)) = (up[r] - down[r]) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

}  // namespace logitype
