#include "logitype/config.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "logitype/error.hpp"
#include "logitype/io.hpp"

namespace logitype {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, where + ": " + what);
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    config_error(where, e.what());
  }
}

json read_json(const fs::path& path) {
  if (!fs::exists(path)) config_error(path.string(), "file not found");
  const json j = parse_json(read_text_file(path), path.string());
  if (!j.is_object()) config_error(path.string(), "top level must be a JSON object");
  return j;
}

// Typed field access with messages that name the file and key.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) config_error(where_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const char* key) const {
    if (!has(key)) config_error(where_, std::string("missing key '") + key + "'");
    return j_.at(key);
  }
  Reader child(const char* key) const { return Reader(raw(key), where_ + "." + key); }
  std::string path(const char* key) const { return where_ + "." + key; }

  template <class T>
  T get(const char* key) const {
    try {
      return raw(key).get<T>();
    } catch (const json::exception&) {
      config_error(where_, std::string("key '") + key + "' has the wrong type");
    }
  }
  template <class T>
  T get(const char* key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  void only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : j_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; })) {
        config_error(where_, "unknown key '" + k + "'");
      }
    }
  }

  const json& json_value() const { return j_; }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
};

AltId alt_key(const std::string& key, const std::string& where) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(key, &used);
    if (used == key.size()) return v;
  } catch (const std::exception&) {
  }
  config_error(where, "'" + key + "' is not an alternative id");
}

ModelSpec spec_from(const Reader& r) {
  r.only({"name", "transform", "ref_alt", "shape_ref_alt", "coefficients"});
  ModelSpec spec;
  spec.name = r.get<std::string>("name", "");
  try {
    spec.transform = family_by_name(r.get<std::string>("transform")).id();
  } catch (const Error& e) {
    config_error(r.path("transform"), e.what());
  }
  spec.ref_alt = r.get<AltId>("ref_alt");
  if (r.has("shape_ref_alt")) spec.shape_ref_alt = r.get<AltId>("shape_ref_alt");
  const json& coefs = r.raw("coefficients");
  if (!coefs.is_array()) config_error(r.path("coefficients"), "expected an array");
  for (std::size_t k = 0; k < coefs.size(); ++k) {
    const Reader c(coefs[k], r.path("coefficients") + "[" + std::to_string(k) + "]");
    c.only({"name", "column", "alts"});
    Coefficient coef;
    coef.column = c.get<std::string>("column");
    coef.name = c.get<std::string>("name", coef.column);
    coef.alts = c.get<std::vector<AltId>>("alts", {});
    spec.coefficients.push_back(std::move(coef));
  }
  return spec;
}

fs::path relative_to(const fs::path& file, const std::string& p) {
  const fs::path candidate(p);
  return candidate.is_absolute() ? candidate : file.parent_path() / candidate;
}

RowPredicate::Condition::Op condition_op(const std::string& s, const std::string& where) {
  using Op = RowPredicate::Condition::Op;
  if (s == "<") return Op::Lt;
  if (s == "<=") return Op::Le;
  if (s == ">") return Op::Gt;
  if (s == ">=") return Op::Ge;
  if (s == "==") return Op::Eq;
  if (s == "!=") return Op::Ne;
  config_error(where, "unknown comparison '" + s + "'");
}

EditOp edit_op(const std::string& s, const std::string& where) {
  if (s == "add") return EditOp::Add;
  if (s == "multiply") return EditOp::Multiply;
  if (s == "set") return EditOp::Set;
  if (s == "subtract_floor0") return EditOp::SubtractFloor0;
  config_error(where, "unknown edit op '" + s + "'");
}

}  // namespace

Schema load_schema(const fs::path& path) {
  const json j = read_json(path);
  const Reader r(j, path.string());
  r.only({"obs_id", "alt_id", "chosen", "weight", "covariates"});
  Schema s;
  s.obs_id = r.get<std::string>("obs_id", s.obs_id);
  s.alt_id = r.get<std::string>("alt_id", s.alt_id);
  s.chosen = r.get<std::string>("chosen", s.chosen);
  if (r.has("weight")) s.weight = r.get<std::string>("weight");
  s.covariates = r.get<std::vector<std::string>>("covariates", {});
  return s;
}

ModelSpec load_spec(const fs::path& path) {
  const json j = read_json(path);
  return spec_from(Reader(j, path.string()));
}

RunOptions load_options(const fs::path& path) {
  const json j = read_json(path);
  const Reader r(j, path.string());
  r.only({"tol_grad", "tol_ll", "max_iter", "multistart", "multistart_scale", "use_weights", "bootstrap"});
  RunOptions o;
  o.fit.tol_grad = r.get<double>("tol_grad", o.fit.tol_grad);
  o.fit.tol_ll = r.get<double>("tol_ll", o.fit.tol_ll);
  o.fit.max_iter = r.get<std::size_t>("max_iter", o.fit.max_iter);
  o.fit.multistart = r.get<std::size_t>("multistart", o.fit.multistart);
  o.fit.multistart_scale = r.get<double>("multistart_scale", o.fit.multistart_scale);
  o.fit.use_weights = r.get<bool>("use_weights", o.fit.use_weights);
  if (!(o.fit.tol_grad > 0.0) || !(o.fit.tol_ll > 0.0) || o.fit.max_iter == 0) {
    config_error(r.where(), "tolerances and max_iter must be positive");
  }
  if (r.has("bootstrap")) {
    const Reader b = r.child("bootstrap");
    b.only({"replicates", "stratified", "warm_start", "jackknife", "jackknife_groups", "max_failure_rate"});
    o.bootstrap.replicates = b.get<std::size_t>("replicates", o.bootstrap.replicates);
    o.bootstrap.stratified = b.get<bool>("stratified", o.bootstrap.stratified);
    o.bootstrap.warm_start = b.get<bool>("warm_start", o.bootstrap.warm_start);
    o.bootstrap.jackknife = b.get<bool>("jackknife", o.bootstrap.jackknife);
    o.bootstrap.jackknife_groups = b.get<std::size_t>("jackknife_groups", o.bootstrap.jackknife_groups);
    o.bootstrap.max_failure_rate = b.get<double>("max_failure_rate", o.bootstrap.max_failure_rate);
  }
  return o;
}

NaturalParams natural_params_from_json(const std::string& json_text, const ModelSpec& spec,
                                       const std::vector<AltId>& alternatives) {
  const json j = parse_json(json_text, "params");
  const Reader r(j, "params");
  r.only({"beta", "tau", "shape"});
  const ParameterLayout layout(spec, alternatives);
  NaturalParams p = layout.unpack(std::vector<double>(layout.size(), 0.0));

  const Reader beta = r.child("beta");
  for (const auto& [name, v] : beta.json_value().items()) {
    const auto it = std::find_if(spec.coefficients.begin(), spec.coefficients.end(),
                                 [&](const Coefficient& c) { return c.name == name; });
    if (it == spec.coefficients.end()) config_error(beta.where(), "unknown coefficient '" + name + "'");
    p.beta[static_cast<std::size_t>(it - spec.coefficients.begin())] = beta.get<double>(name.c_str());
  }
  for (std::size_t k = 0; k < spec.coefficients.size(); ++k) {
    if (!beta.has(spec.coefficients[k].name.c_str())) {
      config_error(beta.where(), "missing coefficient '" + spec.coefficients[k].name + "'");
    }
  }
  auto alt_index = [&](const std::string& key, const std::string& where) {
    const AltId a = alt_key(key, where);
    const auto it = std::find(alternatives.begin(), alternatives.end(), a);
    if (it == alternatives.end()) config_error(where, "alternative " + key + " is not in the choice set");
    return static_cast<std::size_t>(it - alternatives.begin());
  };
  if (r.has("tau")) {
    const Reader tau = r.child("tau");
    for (const auto& [key, v] : tau.json_value().items()) {
      p.tau[alt_index(key, tau.where())] = tau.get<double>(key.c_str());
    }
  }
  if (r.has("shape")) {
    const Reader shape = r.child("shape");
    for (const auto& [key, v] : shape.json_value().items()) {
      const std::size_t j_alt = alt_index(key, shape.where());
      const auto values = v.is_array() ? shape.get<std::vector<double>>(key.c_str())
                                       : std::vector<double>{shape.get<double>(key.c_str())};
      if (values.size() != p.shape[j_alt].size()) {
        config_error(shape.where(), "alternative " + key + " needs " + std::to_string(p.shape[j_alt].size()) +
                                        " shape value(s)");
      }
      p.shape[j_alt] = values;
    }
  }
  try {
    layout.validate(p);
  } catch (const Error& e) {
    config_error("params", e.what());
  }
  return p;
}

SimulationConfig load_simulation(const fs::path& path) {
  const json j = read_json(path);
  const Reader r(j, path.string());
  r.only({"spec", "params", "alternatives", "n_obs", "covariates", "availability"});
  SimulationConfig c;
  const json& spec = r.raw("spec");
  c.spec = spec.is_string() ? load_spec(relative_to(path, spec.get<std::string>())) : spec_from(r.child("spec"));
  c.alternatives = r.get<std::vector<AltId>>("alternatives");
  std::sort(c.alternatives.begin(), c.alternatives.end());
  if (std::adjacent_find(c.alternatives.begin(), c.alternatives.end()) != c.alternatives.end()) {
    config_error(r.path("alternatives"), "duplicate alternative id");
  }
  c.n_obs = r.get<std::size_t>("n_obs");
  try {
    c.true_params = natural_params_from_json(r.raw("params").dump(), c.spec, c.alternatives);
  } catch (const Error& e) {
    config_error(path.string(), e.what());
  }
  const json& covs = r.raw("covariates");
  if (!covs.is_array()) config_error(r.path("covariates"), "expected an array");
  for (std::size_t k = 0; k < covs.size(); ++k) {
    const Reader g(covs[k], r.path("covariates") + "[" + std::to_string(k) + "]");
    g.only({"column", "kind", "a", "b", "per_alt"});
    CovariateGenerator gen;
    gen.column = g.get<std::string>("column");
    const auto kind = g.get<std::string>("kind", "uniform");
    if (kind == "uniform") {
      gen.kind = CovariateGenerator::Kind::Uniform;
    } else if (kind == "normal") {
      gen.kind = CovariateGenerator::Kind::Normal;
    } else if (kind == "constant") {
      gen.kind = CovariateGenerator::Kind::Constant;
    } else {
      config_error(g.path("kind"), "unknown generator '" + kind + "'");
    }
    gen.a = g.get<double>("a", gen.a);
    gen.b = g.get<double>("b", gen.b);
    if (g.has("per_alt")) {
      const Reader per = g.child("per_alt");
      for (const auto& [key, v] : per.json_value().items()) {
        const auto ab = per.get<std::vector<double>>(key.c_str());
        if (ab.size() != 2) config_error(per.where(), "expected [a, b] for alternative " + key);
        gen.per_alt[alt_key(key, per.where())] = {ab[0], ab[1]};
      }
    }
    c.covariates.push_back(std::move(gen));
  }
  if (r.has("availability")) {
    const Reader av = r.child("availability");
    for (const auto& [key, v] : av.json_value().items()) {
      const double p = av.get<double>(key.c_str());
      if (!(p >= 0.0 && p <= 1.0)) config_error(av.where(), "availability must lie in [0, 1]");
      c.availability[alt_key(key, av.where())] = p;
    }
  }
  return c;
}

Scenario load_scenario(const fs::path& path) {
  const json j = read_json(path);
  const Reader r(j, path.string());
  r.only({"name", "edits", "sweep"});
  Scenario s;
  s.name = r.get<std::string>("name", path.stem().string());
  const json& edits = r.raw("edits");
  if (!edits.is_array()) config_error(r.path("edits"), "expected an array");
  for (std::size_t k = 0; k < edits.size(); ++k) {
    const Reader e(edits[k], r.path("edits") + "[" + std::to_string(k) + "]");
    e.only({"column", "op", "alts", "obs", "where", "amount"});
    Edit edit;
    edit.column = e.get<std::string>("column");
    edit.op = edit_op(e.get<std::string>("op"), e.path("op"));
    edit.where.alts = e.get<std::vector<AltId>>("alts", {});
    edit.where.obs = e.get<std::vector<ObsId>>("obs", {});
    if (e.has("where")) {
      const json& conds = e.raw("where");
      if (!conds.is_array()) config_error(e.path("where"), "expected an array");
      for (std::size_t m = 0; m < conds.size(); ++m) {
        const Reader c(conds[m], e.path("where") + "[" + std::to_string(m) + "]");
        c.only({"column", "op", "value"});
        edit.where.where.push_back(
            {c.get<std::string>("column"), condition_op(c.get<std::string>("op"), c.path("op")), c.get<double>("value")});
      }
    }
    if (e.has("amount")) {
      const json& a = e.raw("amount");
      if (a.is_number()) {
        edit.amount.value = a.get<double>();
      } else {
        const Reader am = e.child("amount");
        am.only({"value", "times_sweep", "column", "from_alt"});
        edit.amount.value = am.get<double>("value", 1.0);
        edit.amount.times_sweep = am.get<bool>("times_sweep", false);
        if (am.has("column")) edit.amount.column = am.get<std::string>("column");
        if (am.has("from_alt")) edit.amount.from_alt = am.get<AltId>("from_alt");
      }
    }
    s.edits.push_back(std::move(edit));
  }
  if (r.has("sweep")) {
    const Reader sw = r.child("sweep");
    sw.only({"parameter", "values", "from", "to", "steps"});
    SweepGrid grid;
    grid.parameter = sw.get<std::string>("parameter", "value");
    if (sw.has("values")) {
      grid.values = sw.get<std::vector<double>>("values");
    } else {
      const double from = sw.get<double>("from");
      const double to = sw.get<double>("to");
      const auto steps = sw.get<std::size_t>("steps");
      if (steps < 2) config_error(sw.path("steps"), "need at least two grid points");
      for (std::size_t k = 0; k < steps; ++k) {
        grid.values.push_back(from + (to - from) * static_cast<double>(k) / static_cast<double>(steps - 1));
      }
    }
    s.sweep = std::move(grid);
  }
  return s;
}

TargetingConfig load_targeting(const fs::path& path) {
  const json j = read_json(path);
  const Reader r(j, path.string());
  r.only({"target_alt", "cost_column", "related_alts", "pass_multiplier", "skip_unaffordable", "budgets"});
  TargetingConfig t;
  t.target_alt = r.get<AltId>("target_alt");
  t.cost_column = r.get<std::string>("cost_column", t.cost_column);
  t.related_alts = r.get<std::vector<AltId>>("related_alts", {});
  t.pass_multiplier = r.get<double>("pass_multiplier", t.pass_multiplier);
  t.skip_unaffordable = r.get<bool>("skip_unaffordable", t.skip_unaffordable);
  t.budgets = r.get<std::vector<double>>("budgets");
  if (t.budgets.empty()) config_error(r.path("budgets"), "at least one budget is required");
  for (double b : t.budgets) {
    if (!(b > 0.0)) config_error(r.path("budgets"), "budgets must be positive");
  }
  return t;
}

std::string spec_json(const ModelSpec& spec) {
  json coefs = json::array();
  for (const auto& c : spec.coefficients) coefs.push_back({{"name", c.name}, {"column", c.column}, {"alts", c.alts}});
  json j = {{"name", spec.label()},
            {"transform", std::string(spec.family().name())},
            {"ref_alt", spec.ref_alt},
            {"coefficients", coefs}};
  if (spec.shape_ref_alt) j["shape_ref_alt"] = *spec.shape_ref_alt;
  return j.dump();
}

std::string saved_fit_json(const EstimationResult& result) {
  json params = json::array();
  const ParameterLayout layout(result.spec, result.alternatives);
  for (std::size_t k = 0; k < result.packed_mle.size(); ++k) {
    // Packed values are written with round-trip precision so a reload is exact.
    params.push_back({{"name", result.names[k]}, {"packed", json::parse(format_double(result.packed_mle[k]))}});
  }
  json shapes = json::object();
  for (std::size_t j = 0; j < result.alternatives.size(); ++j) {
    if (!result.mle.shape[j].empty()) shapes[std::to_string(result.alternatives[j])] = result.mle.shape[j];
  }
  json ll_by_alt = json::object();
  for (const auto& [a, v] : result.ll_by_alt) ll_by_alt[std::to_string(a)] = v;
  const json j = {{"spec", json::parse(spec_json(result.spec))},
                  {"alternatives", result.alternatives},
                  {"parameters", params},
                  {"natural_shapes", shapes},
                  {"ll", result.ll},
                  {"ll_by_alt", ll_by_alt},
                  {"status", std::string(to_string(result.status))},
                  {"iterations", result.iterations},
                  {"optimizer", std::string(to_string(result.optimizer_used))},
                  {"grad_norm_inf", result.grad_norm_inf},
                  {"warnings", result.warnings}};
  return j.dump(2) + "\n";
}

std::optional<SavedFit> load_saved_fit(const fs::path& path) {
  const json j = read_json(path);
  if (!j.contains("parameters")) return std::nullopt;
  const Reader r(j, path.string());
  SavedFit fit;
  fit.spec = spec_from(r.child("spec"));
  fit.alternatives = r.get<std::vector<AltId>>("alternatives");
  const json& params = r.raw("parameters");
  if (!params.is_array()) config_error(r.path("parameters"), "expected an array");
  for (std::size_t k = 0; k < params.size(); ++k) {
    fit.packed.push_back(Reader(params[k], r.path("parameters")).get<double>("packed"));
  }
  const ParameterLayout layout(fit.spec, fit.alternatives);
  if (layout.size() != fit.packed.size()) config_error(path.string(), "parameter count does not match the spec");
  return fit;
}

}  // namespace logitype
