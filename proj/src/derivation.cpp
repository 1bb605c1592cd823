#include "logitype/derivation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/numeric/odeint.hpp>

#include "logitype/error.hpp"
#include "logitype/transforms.hpp"

namespace logitype {

namespace {

constexpr double kTolerance = 1e-10;

// Integrates from 0 to each of `targets` (all on one side of 0, ordered
// away from 0) and stores p in `out`.
void integrate_branch(const std::function<double(double)>& d_loss2, double p0, const std::vector<double>& targets,
                      const std::vector<std::size_t>& slots, std::vector<double>& out) {
  namespace odeint = boost::numeric::odeint;
  if (targets.empty()) return;
  auto rhs = [&](const double& p, double& dp, double) {
    const double d = d_loss2(p);
    dp = p / d;
  };
  std::vector<double> times{0.0};
  times.insert(times.end(), targets.begin(), targets.end());
  std::vector<double> values;
  values.reserve(times.size());
  double state = p0;
  const double dt = targets.front() > 0.0 ? 1e-3 : -1e-3;
  try {
    odeint::integrate_times(odeint::make_controlled<odeint::runge_kutta_dopri5<double>>(kTolerance, kTolerance),
                            rhs, state, times.begin(), times.end(), dt,
                            [&](const double& p, double) { values.push_back(p); });
  } catch (const std::exception& e) {
    throw Error(ErrorCode::IntegrationFailure, e.what());
  }
  if (values.size() != times.size()) throw Error(ErrorCode::IntegrationFailure, "integration stopped early");
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double p = values[k + 1];
    if (!std::isfinite(p) || !(p > 0.0 && p < 1.0)) {
      throw Error(ErrorCode::IntegrationFailure, "p left (0, 1) at V = " + std::to_string(targets[k]));
    }
    out[slots[k]] = p;
  }
}

}  // namespace

double prob_from_composite(const PartialLossPair& pair, double v) {
  const double l1 = pair.d_loss1(v);
  const double l2 = pair.d_loss2(v);
  const double denom = l2 - l1;
  if (!std::isfinite(denom) || denom == 0.0) {
    throw Error(ErrorCode::DegenerateDenominator, "L2' - L1' vanishes at V = " + std::to_string(v));
  }
  return l2 / denom;
}

PartialLossPair log_loss_partials() {
  return {[](double v) { return -logistic(-v); }, [](double v) { return logistic(v); }};
}

PartialLossPair uneven_log_loss_partials(double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  return {[](double v) { return -logistic(-v); }, [gamma](double v) { return logistic(gamma * v); }};
}

CpeLoss negative_log_likelihood() {
  auto d = [](double p) { return 1.0 / (1.0 - p); };
  return {d, d};
}

CpeLoss asymmetric_negative_log_likelihood(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma must lie in (0, 1)");
  const double up = -1.0 / std::log(gamma);
  const double down = -1.0 / std::log1p(-gamma);
  return {[up](double p) { return up / (1.0 - p); }, [down](double p) { return down / (1.0 - p); }};
}

std::vector<double> prob_from_cpe(const CpeLoss& loss, double p0, std::span<const double> grid) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw Error(ErrorCode::InvalidArgument, "p0 must lie in (0, 1)");
  std::vector<double> out(grid.size(), p0);
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });

  std::vector<double> up, down;
  std::vector<std::size_t> up_slot, down_slot;
  for (std::size_t idx : order) {
    if (!std::isfinite(grid[idx])) throw Error(ErrorCode::InvalidArgument, "grid values must be finite");
    if (grid[idx] > 0.0) {
      up.push_back(grid[idx]);
      up_slot.push_back(idx);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (grid[*it] < 0.0) {
      down.push_back(grid[*it]);
      down_slot.push_back(*it);
    }
  }
  integrate_branch(loss.upper, p0, up, up_slot, out);
  integrate_branch(loss.lower, p0, down, down_slot, out);
  return out;
}

double binary_asym_logit(double v, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma must lie in (0, 1)");
  if (v >= 0.0) return 1.0 / (1.0 + (1.0 / gamma - 1.0) * std::pow(gamma, v));
  return 1.0 / (1.0 + std::pow(1.0 - gamma, v + 1.0) / gamma);
}

}  // namespace logitype
