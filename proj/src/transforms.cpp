#include "logitype/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logitype/error.hpp"

namespace logitype {

namespace {

// Beyond this magnitude the neglected term in softplus / log-expm1 is below
// 1e-15 relative to the kept one.
constexpr double kBranch = 34.0;
// Largest V for which e^V is finite.
const double kMaxExpArg = std::log(std::numeric_limits<double>::max());

constexpr Family kAll[] = {Family::Mnl,         Family::Cloglog,  Family::Scobit,  Family::UnevenLogit,
                           Family::AsymLogit,   Family::Exponential, Family::Rayleigh, Family::Weibull,
                           Family::Pareto,      Family::Qgev,     Family::Czado};

// Cap for czado derivatives at extreme shapes: large enough to never bind
// where S itself is moderate, small enough that kernel products stay finite.
constexpr double kDerivCap = 1e150;
const double kLogDerivCap = std::log(kDerivCap);

double capped_exp(double x) { return x > kLogDerivCap ? kDerivCap : std::exp(x); }

[[noreturn]] void domain_error(Family f, const std::string& what) {
  throw Error(ErrorCode::DomainViolation, std::string(TransformFamily(f).name()) + ": " + what);
}

}  // namespace

double softplus(double x) {
  if (x > kBranch) return x + std::exp(-x);
  if (x < -kBranch) return std::exp(x);
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double log_expm1(double x) {
  if (x > kBranch) return x + std::log1p(-std::exp(-x));
  return std::log(std::expm1(x));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::string_view TransformFamily::name() const {
  switch (family_) {
    case Family::Mnl: return "mnl";
    case Family::Cloglog: return "cloglog";
    case Family::Scobit: return "scobit";
    case Family::UnevenLogit: return "uneven_logit";
    case Family::AsymLogit: return "asym_logit";
    case Family::Exponential: return "exponential";
    case Family::Rayleigh: return "rayleigh";
    case Family::Weibull: return "weibull";
    case Family::Pareto: return "pareto";
    case Family::Qgev: return "qgev";
    case Family::Czado: return "czado";
  }
  return "unknown";
}

std::size_t TransformFamily::shapes_per_alt() const {
  switch (family_) {
    case Family::Scobit:
    case Family::UnevenLogit:
    case Family::AsymLogit:
    case Family::Weibull:
    case Family::Qgev:
      return 1;
    case Family::Czado:
      return 2;
    default:
      return 0;
  }
}

bool TransformFamily::increasing() const {
  switch (family_) {
    case Family::Exponential:
    case Family::Rayleigh:
    case Family::Weibull:
    case Family::Pareto:
    case Family::Qgev:
      return false;
    default:
      return true;
  }
}

bool TransformFamily::restricted() const {
  switch (family_) {
    case Family::Exponential:
    case Family::Rayleigh:
    case Family::Weibull:
    case Family::Pareto:
    case Family::Qgev:
    case Family::Czado:
      return true;
    default:
      return false;
  }
}

std::optional<std::string> TransformFamily::domain_violation(double v, std::span<const double> shape) const {
  if (!std::isfinite(v)) return "V is not finite";
  if (shape.size() < shapes_per_alt()) return "missing shape parameter";
  for (std::size_t k = 0; k < shapes_per_alt(); ++k) {
    if (!std::isfinite(shape[k])) return "gamma is not finite";
  }
  switch (family_) {
    case Family::Mnl:
      return std::nullopt;
    case Family::Cloglog:
      if (v > kMaxExpArg) return "V > 709.78 (e^V overflows)";
      return std::nullopt;
    case Family::Scobit:
    case Family::UnevenLogit:
      if (shape[0] <= 0.0) return "gamma <= 0";
      return std::nullopt;
    case Family::AsymLogit:
      if (!(shape[0] > 0.0 && shape[0] < 1.0)) return "gamma not in (0, 1)";
      return std::nullopt;
    case Family::Exponential:
    case Family::Rayleigh:
      if (v <= 0.0) return "V <= 0";
      return std::nullopt;
    case Family::Weibull:
      if (shape[0] <= 0.0) return "gamma <= 0";
      if (v <= 0.0) return "V <= 0";
      return std::nullopt;
    case Family::Pareto:
      if (v <= 1.0) return "V <= 1";
      return std::nullopt;
    case Family::Qgev:
      if (1.0 + (shape[0] - 1.0) * v <= 0.0) return "1 + (gamma - 1) V <= 0, i.e. V <= -1/(gamma - 1)";
      return std::nullopt;
    case Family::Czado:
      if (shape[0] <= 0.0 || shape[1] <= 0.0) return "gamma <= 0";
      return std::nullopt;
  }
  return std::nullopt;
}

double TransformFamily::value(double v, std::span<const double> shape, std::size_t J) const {
  switch (family_) {
    case Family::Mnl:
      return v;
    case Family::Cloglog:
      return log_expm1(std::exp(v));
    case Family::Scobit: {
      const double a = shape[0] * softplus(-v);
      return -log_expm1(a);
    }
    case Family::UnevenLogit:
      return softplus(v) - softplus(-shape[0] * v);
    case Family::AsymLogit: {
      const double g = shape[0];
      if (v >= 0.0) return std::log(g) - v * std::log(g);
      return std::log(g) - v * std::log((1.0 - g) / static_cast<double>(J - 1));
    }
    case Family::Exponential:
      return -std::log(v);
    case Family::Rayleigh:
      return -2.0 * std::log(v);
    case Family::Weibull:
      return -shape[0] * std::log(v);
    case Family::Pareto:
      return std::log(v) - std::log(v - 1.0);
    case Family::Qgev: {
      // gamma = 1 is the continuous limit S = -V.
      const double c = shape[0] - 1.0;
      if (c == 0.0) return -v;
      return -std::log1p(c * v) / c;
    }
    case Family::Czado: {
      // ((1 + |V|)^g - 1) / g, saturated at the largest double instead of
      // overflowing for very large shapes.
      const double g = v >= 0.0 ? shape[0] : shape[1];
      const double a = g * std::log1p(std::abs(v));
      double mag;
      if (a < kMaxExpArg) {
        mag = std::expm1(a) / g;
      } else {
        const double log_mag = a + std::log(-std::expm1(-a)) - std::log(g);
        mag = log_mag < kMaxExpArg ? std::exp(log_mag) : std::numeric_limits<double>::max();
      }
      return v >= 0.0 ? mag : -mag;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double TransformFamily::d_index(double v, std::span<const double> shape, std::size_t J) const {
  switch (family_) {
    case Family::Mnl:
      return 1.0;
    case Family::Cloglog: {
      const double u = std::exp(v);
      return u / -std::expm1(-u);
    }
    case Family::Scobit: {
      const double a = shape[0] * softplus(-v);
      return shape[0] * logistic(-v) / -std::expm1(-a);
    }
    case Family::UnevenLogit:
      return logistic(v) + shape[0] * logistic(-shape[0] * v);
    case Family::AsymLogit: {
      const double g = shape[0];
      if (v >= 0.0) return -std::log(g);
      return -std::log((1.0 - g) / static_cast<double>(J - 1));
    }
    case Family::Exponential:
      return -1.0 / v;
    case Family::Rayleigh:
      return -2.0 / v;
    case Family::Weibull:
      return -shape[0] / v;
    case Family::Pareto:
      return 1.0 / v - 1.0 / (v - 1.0);
    case Family::Qgev:
      return -1.0 / (1.0 + (shape[0] - 1.0) * v);
    case Family::Czado:
      if (v >= 0.0) return capped_exp((shape[0] - 1.0) * std::log1p(v));
      return capped_exp((shape[1] - 1.0) * std::log1p(-v));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

ShapeGradient TransformFamily::d_shape(double v, std::span<const double> shape, std::size_t J) const {
  (void)J;
  switch (family_) {
    case Family::Scobit: {
      const double l = softplus(-v);
      const double a = shape[0] * l;
      return {-l / -std::expm1(-a), 0.0};
    }
    case Family::UnevenLogit:
      return {v * logistic(-shape[0] * v), 0.0};
    case Family::AsymLogit: {
      const double g = shape[0];
      if (v >= 0.0) return {(1.0 - v) / g, 0.0};
      return {1.0 / g + v / (1.0 - g), 0.0};
    }
    case Family::Weibull:
      return {-std::log(v), 0.0};
    case Family::Qgev: {
      const double c = shape[0] - 1.0;
      if (std::abs(c * v) < 1e-3) {
        // The closed form cancels catastrophically here; sum
        // (-1)^n (n - 1) c^(n-2) v^n / n for n >= 2 instead.
        double term = v * v;
        double sum = 0.0;
        for (int n = 2; n <= 8; ++n) {
          sum += (n % 2 == 0 ? 1.0 : -1.0) * (n - 1) * term / n;
          term *= c * v;
        }
        return {sum, 0.0};
      }
      const double l = std::log1p(c * v);
      return {l / (c * c) - v / (c * (1.0 + c * v)), 0.0};
    }
    case Family::Czado: {
      const double g = v >= 0.0 ? shape[0] : shape[1];
      const double l = std::log1p(std::abs(v));
      const double a = g * l;
      double d;
      if (a < 300.0) {
        d = (l * std::exp(a) * g - std::expm1(a)) / (g * g);
      } else {
        // e^a / g * (l - (1 - e^-a) / g), assembled in log space.
        const double t = l + std::expm1(-a) / g;
        d = t == 0.0 ? 0.0 : std::copysign(capped_exp(a - std::log(g) + std::log(std::abs(t))), t);
      }
      if (v >= 0.0) return {d, 0.0};
      return {0.0, -d};
    }
    default:
      return {0.0, 0.0};
  }
}

std::vector<double> TransformFamily::to_natural(std::span<const double> unconstrained) const {
  std::vector<double> out(unconstrained.size());
  switch (family_) {
    case Family::AsymLogit: {
      if (unconstrained.empty()) return out;
      const double m = *std::max_element(unconstrained.begin(), unconstrained.end());
      double total = 0.0;
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = std::exp(unconstrained[k] - m);
        total += out[k];
      }
      // Extreme gaps would round a share to exactly 0 or 1; keep it inside (0, 1).
      for (double& g : out) g = std::clamp(g / total, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
      return out;
    }
    case Family::Qgev:
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = 1.0 + std::exp(unconstrained[k]);
      return out;
    default:
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::exp(unconstrained[k]);
      return out;
  }
}

std::vector<double> TransformFamily::from_natural(std::span<const double> natural, std::size_t ref) const {
  std::vector<double> out(natural.size());
  switch (family_) {
    case Family::AsymLogit: {
      if (natural.empty()) return out;
      for (double g : natural) {
        if (!(g > 0.0 && g < 1.0)) throw Error(ErrorCode::InvalidParams, "asym_logit gamma not in (0, 1)");
      }
      const double base = std::log(natural[ref]);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::log(natural[k]) - base;
      return out;
    }
    case Family::Qgev:
      for (std::size_t k = 0; k < out.size(); ++k) {
        if (!(natural[k] > 1.0)) throw Error(ErrorCode::InvalidParams, "qgev gamma must exceed 1 to be representable");
        out[k] = std::log(natural[k] - 1.0);
      }
      return out;
    default:
      for (std::size_t k = 0; k < out.size(); ++k) {
        if (!(natural[k] > 0.0)) {
          throw Error(ErrorCode::InvalidParams, std::string(name()) + " gamma must be positive");
        }
        out[k] = std::log(natural[k]);
      }
      return out;
  }
}

TransformFamily family_by_name(std::string_view name) {
  for (Family f : kAll) {
    if (TransformFamily(f).name() == name) return TransformFamily(f);
  }
  if (name == "uneven") return TransformFamily(Family::UnevenLogit);
  if (name == "asym") return TransformFamily(Family::AsymLogit);
  if (name == "clog-log") return TransformFamily(Family::Cloglog);
  throw Error(ErrorCode::InvalidArgument, "unknown transform family '" + std::string(name) + "'");
}

std::span<const Family> all_families() { return kAll; }

double s_mnl(double v) { return v; }

double s_cloglog(double v) {
  const TransformFamily f(Family::Cloglog);
  if (auto bad = f.domain_violation(v, {})) domain_error(Family::Cloglog, *bad);
  return f.value(v, {});
}

double s_scobit(double v, double gamma) {
  const TransformFamily f(Family::Scobit);
  const double shape[] = {gamma};
  if (auto bad = f.domain_violation(v, shape)) domain_error(Family::Scobit, *bad);
  return f.value(v, shape);
}

double s_uneven(double v, double gamma) {
  const TransformFamily f(Family::UnevenLogit);
  const double shape[] = {gamma};
  if (auto bad = f.domain_violation(v, shape)) domain_error(Family::UnevenLogit, *bad);
  return f.value(v, shape);
}

double s_asym(double v, double gamma, std::size_t J) {
  const TransformFamily f(Family::AsymLogit);
  if (J < 2) throw Error(ErrorCode::InvalidArgument, "asym_logit needs J >= 2");
  const double shape[] = {gamma};
  if (auto bad = f.domain_violation(v, shape)) domain_error(Family::AsymLogit, *bad);
  return f.value(v, shape, J);
}

double s_restricted(Family family, double v, std::span<const double> shape) {
  const TransformFamily f(family);
  if (!f.restricted()) throw Error(ErrorCode::InvalidArgument, std::string(f.name()) + " is not a restricted family");
  if (auto bad = f.domain_violation(v, shape)) domain_error(family, *bad);
  return f.value(v, shape);
}

std::vector<double> reparam(Family family, std::span<const double> unconstrained) {
  return TransformFamily(family).to_natural(unconstrained);
}

}  // namespace logitype
