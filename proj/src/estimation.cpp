#include "logitype/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logitype/error.hpp"
#include "logitype/likelihood.hpp"
#include "logitype/parallel.hpp"
#include "logitype/random.hpp"

namespace logitype {

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::Converged: return "converged";
    case FitStatus::MaxIters: return "max_iters";
    case FitStatus::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

std::string_view to_string(Optimizer optimizer) {
  switch (optimizer) {
    case Optimizer::Bfgs: return "bfgs";
    case Optimizer::Newton: return "newton";
    case Optimizer::GradientAscent: return "gradient_ascent";
  }
  return "unknown";
}

namespace {

using Vec = Eigen::VectorXd;

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 50;

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct Point {
  Vec x;
  double f = -std::numeric_limits<double>::infinity();
  Vec g;
  std::size_t floored = 0;
  bool ok = false;
};

class Objective {
 public:
  Objective(const LikelihoodKernel& kernel, bool use_weights, std::vector<unsigned char> fixed)
      : kernel_(kernel), use_weights_(use_weights), fixed_(std::move(fixed)) {}

  Point at(const Vec& x) const {
    Point p;
    p.x = x;
    try {
      const auto v = kernel_.evaluate(kernel_.layout().unpack({x.data(), static_cast<std::size_t>(x.size())}),
                                      use_weights_, true);
      p.f = v.ll;
      p.g = Eigen::Map<const Vec>(v.gradient.data(), static_cast<Eigen::Index>(v.gradient.size()));
      p.floored = v.floored;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DomainViolation && e.code() != ErrorCode::NonFiniteIndex &&
          e.code() != ErrorCode::InvalidParams) {
        throw;
      }
      p.f = -std::numeric_limits<double>::infinity();
      return p;
    }
    mask(p.g);
    p.ok = std::isfinite(p.f) && p.g.allFinite();
    return p;
  }

  void mask(Vec& v) const {
    for (std::size_t k = 0; k < fixed_.size(); ++k) {
      if (fixed_[k]) v[static_cast<Eigen::Index>(k)] = 0.0;
    }
  }
  bool is_fixed(std::size_t k) const { return k < fixed_.size() && fixed_[k]; }
  const LikelihoodKernel& kernel() const { return kernel_; }
  bool use_weights() const { return use_weights_; }

 private:
  const LikelihoodKernel& kernel_;
  bool use_weights_;
  std::vector<unsigned char> fixed_;
};

struct Run {
  Point cur;
  FitStatus status = FitStatus::MaxIters;
  Optimizer used = Optimizer::Bfgs;
  std::size_t iterations = 0;
  double prev_f = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> history;
};

bool is_converged(const Run& run, const EstimationOptions& opt) {
  if (inf_norm(run.cur.g) >= opt.tol_grad) return false;
  if (std::isnan(run.prev_f)) return true;
  return std::abs(run.cur.f - run.prev_f) < opt.tol_ll * std::max(1.0, std::abs(run.cur.f));
}

void accept(Run& run, Point next) {
  run.prev_f = run.cur.f;
  run.cur = std::move(next);
  run.history.push_back(run.cur.f);
  ++run.iterations;
}

struct Step {
  Point point;
  double alpha = 0.0;
};

// Backtracking Armijo search along an ascent direction. Near the optimum the
// LL difference drowns in rounding, so a step that leaves LL unchanged to
// within that rounding but shrinks the gradient is also taken.
std::optional<Step> line_search(const Objective& obj, const Point& cur, const Vec& d, double alpha) {
  const double slope = cur.g.dot(d);
  if (!(slope > 0.0)) return std::nullopt;
  const double slack = 1e-12 * (1.0 + std::abs(cur.f));
  const double gnorm = inf_norm(cur.g);
  for (int h = 0; h <= kMaxHalvings; ++h, alpha *= 0.5) {
    Point trial = obj.at(cur.x + alpha * d);
    if (!trial.ok) continue;
    if (trial.f >= cur.f + kArmijo * alpha * slope) return Step{std::move(trial), alpha};
    if (trial.f >= cur.f - slack && inf_norm(trial.g) < gnorm) return Step{std::move(trial), alpha};
  }
  return std::nullopt;
}

void bfgs(const Objective& obj, const EstimationOptions& opt, Run& run) {
  run.used = Optimizer::Bfgs;
  const Eigen::Index n = run.cur.x.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  for (std::size_t iter = 0;; ++iter) {
    if (is_converged(run, opt)) {
      run.status = FitStatus::Converged;
      return;
    }
    if (iter == opt.max_iter) {
      run.status = FitStatus::MaxIters;
      return;
    }
    Vec d = h * run.cur.g;
    obj.mask(d);
    double alpha0 = scaled ? 1.0 : 1.0 / std::max(1.0, inf_norm(run.cur.g));
    auto step = line_search(obj, run.cur, d, alpha0);
    if (!step && scaled) {
      // Curvature estimate went stale; restart from steepest ascent.
      h.setIdentity();
      scaled = false;
      step = line_search(obj, run.cur, run.cur.g, 1.0 / std::max(1.0, inf_norm(run.cur.g)));
    }
    if (!step) {
      run.status = FitStatus::LineSearchFailed;
      return;
    }
    const Vec s = step->point.x - run.cur.x;
    const Vec y = run.cur.g - step->point.g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm() && sy > 0.0) {
      if (!scaled) {
        h = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vec hy = h * y;
      h += (rho * rho * (sy + y.dot(hy))) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }
    accept(run, std::move(step->point));
  }
}

void newton(const Objective& obj, const EstimationOptions& opt, Run& run) {
  run.used = Optimizer::Newton;
  const std::size_t n = static_cast<std::size_t>(run.cur.x.size());
  std::vector<Eigen::Index> free;
  for (std::size_t k = 0; k < n; ++k) {
    if (!obj.is_fixed(k)) free.push_back(static_cast<Eigen::Index>(k));
  }
  const Eigen::Index m = static_cast<Eigen::Index>(free.size());
  for (std::size_t iter = 0;; ++iter) {
    if (is_converged(run, opt)) {
      run.status = FitStatus::Converged;
      return;
    }
    if (iter == opt.max_iter) {
      run.status = FitStatus::MaxIters;
      return;
    }
    Eigen::MatrixXd full;
    try {
      full = finite_difference_hessian(obj.kernel(), {run.cur.x.data(), n}, obj.use_weights());
    } catch (const Error&) {
      run.status = FitStatus::LineSearchFailed;
      return;
    }
    if (!full.allFinite()) {
      run.status = FitStatus::LineSearchFailed;
      return;
    }
    Eigen::MatrixXd sub(m, m);
    Vec g(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      g[a] = run.cur.g[free[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = full(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
    }
    // Shift the spectrum to negative definite so the Newton step ascends.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub);
    Vec lambda = eig.eigenvalues();
    const double delta = std::max(1e-8 * inf_norm(lambda), 1e-10);
    for (Eigen::Index k = 0; k < m; ++k) lambda[k] = -std::max(std::abs(lambda[k]), delta);
    const Vec dsub = -(eig.eigenvectors() * (eig.eigenvectors().transpose() * g).cwiseQuotient(lambda));
    Vec d = Vec::Zero(static_cast<Eigen::Index>(n));
    for (Eigen::Index a = 0; a < m; ++a) d[free[static_cast<std::size_t>(a)]] = dsub[a];
    auto step = line_search(obj, run.cur, d, 1.0);
    if (!step) {
      run.status = FitStatus::LineSearchFailed;
      return;
    }
    accept(run, std::move(step->point));
  }
}

void gradient_ascent(const Objective& obj, const EstimationOptions& opt, Run& run) {
  run.used = Optimizer::GradientAscent;
  double alpha = 1.0 / std::max(1.0, inf_norm(run.cur.g));
  for (std::size_t iter = 0;; ++iter) {
    if (is_converged(run, opt)) {
      run.status = FitStatus::Converged;
      return;
    }
    if (iter == opt.max_iter) {
      run.status = FitStatus::MaxIters;
      return;
    }
    auto step = line_search(obj, run.cur, run.cur.g, 2.0 * alpha);
    if (!step) {
      run.status = FitStatus::LineSearchFailed;
      return;
    }
    alpha = step->alpha;
    accept(run, std::move(step->point));
  }
}

Run cascade(const Objective& obj, const EstimationOptions& opt, Point start) {
  Run run;
  run.cur = std::move(start);
  bfgs(obj, opt, run);
  if (run.status != FitStatus::Converged) newton(obj, opt, run);
  if (run.status != FitStatus::Converged) gradient_ascent(obj, opt, run);
  return run;
}

}  // namespace

std::vector<double> default_init(const ChoiceDataset& data, const ModelSpec& spec, bool use_weights,
                                 std::vector<std::string>* warnings) {
  const ParameterLayout layout(spec, data.alternatives());
  std::vector<double> packed(layout.size(), 0.0);
  std::vector<double> counts(data.n_alternatives(), 0.0);
  for (std::size_t i = 0; i < data.n_obs(); ++i) {
    counts[data.chosen_alt_index(i)] += use_weights ? data.observation(i).weight : 1.0;
  }
  const double ref = counts[layout.ref_index()];
  const auto& tau_alts = layout.tau_alts();
  for (std::size_t t = 0; t < tau_alts.size(); ++t) {
    const double c = counts[tau_alts[t]];
    if (c > 0.0 && ref > 0.0) {
      packed[layout.tau_offset() + t] = std::log(c / ref);
    } else if (warnings) {
      warnings->push_back("DegenerateShares: alternative " + std::to_string(data.alternatives()[tau_alts[t]]) +
                          (ref > 0.0 ? " is never chosen" : " (reference alternative is never chosen)") +
                          "; tau starts at 0");
    }
  }
  return packed;
}

EstimationResult fit(const ChoiceDataset& data, const ModelSpec& spec, const std::optional<std::vector<double>>& init,
                     const EstimationOptions& options) {
  const LikelihoodKernel kernel(data, spec);
  const ParameterLayout& layout = kernel.layout();
  EstimationResult result;
  result.spec = spec;
  result.alternatives.assign(data.alternatives().begin(), data.alternatives().end());
  result.names = layout.names();

  const std::vector<double> x0 = init ? *init : default_init(data, spec, options.use_weights, &result.warnings);
  if (x0.size() != layout.size()) {
    throw Error(ErrorCode::InvalidArgument, "initial vector has " + std::to_string(x0.size()) +
                                                " entries, model has " + std::to_string(layout.size()));
  }
  if (!options.fixed.empty() && options.fixed.size() != layout.size()) {
    throw Error(ErrorCode::InvalidArgument, "fixed mask length does not match the parameter count");
  }
  result.n_fixed = static_cast<std::size_t>(std::count(options.fixed.begin(), options.fixed.end(), 1));

  const Objective obj(kernel, options.use_weights, options.fixed);
  const Vec start = Eigen::Map<const Vec>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  Point p0 = obj.at(start);
  if (!p0.ok) {
    throw Error(ErrorCode::NonFiniteObjectiveAtInit,
                "log-likelihood is not finite at the initial point (for restricted families supply an init "
                "that keeps every V in the domain)");
  }

  std::vector<Point> starts{p0};
  for (std::size_t s = 0; s < options.multistart; ++s) {
    Rng rng(options.seed, s + 1);
    Vec x = start;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (!obj.is_fixed(static_cast<std::size_t>(k))) x[k] += options.multistart_scale * rng.normal();
    }
    starts.push_back(obj.at(x));
  }
  std::vector<std::optional<Run>> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    if (starts[s].ok) runs[s] = cascade(obj, options, starts[s]);
  });
  std::size_t best = 0;
  for (std::size_t s = 1; s < runs.size(); ++s) {
    if (runs[s] && runs[s]->cur.f > runs[best]->cur.f) best = s;
  }
  Run& run = *runs[best];

  result.packed_mle.assign(run.cur.x.data(), run.cur.x.data() + run.cur.x.size());
  result.mle = layout.unpack(result.packed_mle);
  result.ll = run.cur.f;
  result.floored = run.cur.floored;
  result.grad_norm_inf = inf_norm(run.cur.g);
  result.status = run.status;
  result.optimizer_used = run.used;
  result.iterations = run.iterations;
  result.ll_history = std::move(run.history);
  result.ll_by_alt = kernel.ll_by_alternative(result.mle, options.use_weights);
  if (result.floored > 0) {
    result.warnings.push_back(std::to_string(result.floored) + " chosen probabilities hit the 1e-300 floor");
  }
  if (options.compute_hessian) {
    try {
      result.hessian = finite_difference_hessian(kernel, result.packed_mle, options.use_weights);
    } catch (const Error& e) {
      result.warnings.push_back(std::string("Hessian unavailable: ") + e.what());
    }
  }
  return result;
}

}  // namespace logitype
