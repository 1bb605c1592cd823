#include "logitype/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "logitype/config.hpp"
#include "logitype/error.hpp"
#include "logitype/inference.hpp"
#include "logitype/io.hpp"
#include "logitype/likelihood.hpp"
#include "logitype/parallel.hpp"
#include "logitype/validation.hpp"

namespace logitype {

namespace {

namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitEstimation = 4;

struct Common {
  std::string data;
  std::string schema;
  std::string options;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct Args {
  Common common;
  std::string spec;
  std::vector<std::string> specs;
  std::string full, restricted;
  int df = 0;
  std::size_t k = 10;
  std::size_t replicates = 0;
  std::string config;
  std::string scenario;
  std::string selection, truth, targeting;
};

class Session {
 public:
  Session(std::string command, const Args& args, std::ostream& out)
      : command_(std::move(command)), args_(args), out_(out) {}

  std::string stage = "setup";

  RunOptions options() {
    stage = "options";
    RunOptions o = args_.common.options.empty() ? RunOptions{} : load_options(args_.common.options);
    o.fit.seed = args_.common.seed;
    o.bootstrap.seed = args_.common.seed;
    o.bootstrap.fit = o.fit;
    return o;
  }

  ChoiceDataset data() {
    stage = "data";
    if (args_.common.data.empty()) throw Error(ErrorCode::ConfigError, "--data is required");
    const Schema schema = args_.common.schema.empty() ? Schema{} : load_schema(args_.common.schema);
    return load_csv(args_.common.data, schema);
  }

  EstimationResult estimate(const ChoiceDataset& data, const fs::path& spec_path, const EstimationOptions& fit_options) {
    stage = "spec " + spec_path.string();
    const ModelSpec spec = load_spec(spec_path);
    validate_spec(spec, data);
    stage = "estimation of " + spec.label();
    return fit(data, spec, std::nullopt, fit_options);
  }

  /// A spec is fitted on `data`; a saved fit (params.json) is used as is.
  FittedModel model(const ChoiceDataset& data, const fs::path& path, const EstimationOptions& fit_options) {
    stage = "model " + path.string();
    if (const auto saved = load_saved_fit(path)) {
      validate_spec(saved->spec, data);
      const ParameterLayout layout(saved->spec, data.alternatives());
      if (!std::ranges::equal(saved->alternatives, data.alternatives())) {
        throw Error(ErrorCode::SpecDataMismatch, path.string() + " was fitted on a different set of alternatives");
      }
      return {saved->spec, layout.unpack(saved->packed)};
    }
    const auto r = estimate(data, path, fit_options);
    require_converged(r);
    return FittedModel::from(r);
  }

  void require_converged(const EstimationResult& r) {
    if (!r.converged()) {
      stage = "estimation of " + r.spec.label();
      throw Error(ErrorCode::EstimationFailure, r.spec.label() + " stopped with status " +
                                                    std::string(to_string(r.status)) + " after " +
                                                    std::to_string(r.iterations) + " iterations");
    }
  }

  void write(const std::string& name, const std::string& text) {
    stage = "writing " + name;
    const fs::path dir = out_dir();
    write_text_file(dir / name, text);
    outputs_.push_back(name);
  }

  fs::path out_dir() {
    if (args_.common.out.empty()) throw Error(ErrorCode::ConfigError, "--out is required");
    const fs::path dir(args_.common.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
      throw Error(ErrorCode::ConfigError, "cannot create output directory " + dir.string());
    }
    return dir;
  }

  void manifest(const std::vector<std::pair<std::string, std::string>>& inputs) {
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["seed"] = args_.common.seed;
    j["threads"] = args_.common.threads;
    nlohmann::ordered_json in = nlohmann::ordered_json::object();
    for (const auto& [k, v] : inputs) {
      if (!v.empty()) in[k] = v;
    }
    j["inputs"] = in;
    j["outputs"] = outputs_;
    write("manifest.json", j.dump(2) + "\n");
  }

  std::ostream& out() { return out_; }

 private:
  std::string command_;
  const Args& args_;
  std::ostream& out_;
  std::vector<std::string> outputs_;
};

std::string params_csv(const EstimationResult& r) {
  const ParameterLayout layout(r.spec, r.alternatives);
  std::string out = "parameter,estimate,natural\n";
  for (std::size_t k = 0; k < r.packed_mle.size(); ++k) {
    double natural = r.packed_mle[k];
    if (k >= layout.shape_offset()) {
      const auto [alt, comp] = layout.shape_slots()[k - layout.shape_offset()];
      natural = r.mle.shape[alt][comp];
    }
    out += csv_field(r.names[k]) + "," + format_double(r.packed_mle[k]) + "," + format_double(natural) + "\n";
  }
  return out;
}

std::string ll_by_alt_csv(const EstimationResult& r) {
  std::string out = "alt_id,ll\n";
  for (const auto& [a, v] : r.ll_by_alt) out += std::to_string(a) + "," + format_double(v) + "\n";
  return out;
}

void print_fit(std::ostream& out, const EstimationResult& r, const std::vector<std::string>& stars) {
  out << "model " << r.spec.label() << ": LL = " << std::setprecision(10) << r.ll << ", status "
      << to_string(r.status) << " (" << to_string(r.optimizer_used) << ", " << r.iterations << " iterations)\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  std::size_t width = 9;
  for (const auto& n : r.names) width = std::max(width, n.size());
  out << std::left << std::setw(static_cast<int>(width) + 2) << "parameter" << std::right << std::setw(14)
      << "estimate" << "\n";
  for (std::size_t k = 0; k < r.names.size(); ++k) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << r.names[k] << std::right << std::setw(14)
        << std::fixed << std::setprecision(6) << r.packed_mle[k] << std::defaultfloat;
    if (!stars.empty()) out << " " << stars[k];
    out << "\n";
  }
  if (!stars.empty()) out << "* 95% BCa interval excludes 0, ** 99% BCa interval excludes 0\n";
}

int cmd_estimate(Session& s, const Args& a, bool always_bootstrap) {
  auto opts = s.options();
  if (a.replicates > 0) opts.bootstrap.replicates = a.replicates;
  const auto data = s.data();
  if (a.spec.empty()) throw Error(ErrorCode::ConfigError, "--spec is required");
  const auto r = s.estimate(data, a.spec, opts.fit);
  s.write("params.csv", params_csv(r));
  s.write("ll_by_alt.csv", ll_by_alt_csv(r));
  s.write("params.json", saved_fit_json(r));
  s.require_converged(r);

  std::vector<std::string> stars;
  if (always_bootstrap || a.replicates > 0) {
    s.stage = "bootstrap";
    const auto run = bootstrap(data, r.spec, r, opts.bootstrap);
    const auto i95 = bca_intervals(run, r.packed_mle, 0.95);
    const auto i99 = bca_intervals(run, r.packed_mle, 0.99);
    for (std::size_t k = 0; k < i95.size(); ++k) stars.push_back(significance_stars(i95[k], i99[k]));
    s.write("intervals.csv", intervals_csv(r.names, r.packed_mle, i95, i99));
    if (run.failures > 0) s.out() << run.failures << " of " << run.B << " bootstrap replicates failed\n";
  }
  print_fit(s.out(), r, stars);
  s.manifest({{"data", a.common.data}, {"schema", a.common.schema}, {"spec", a.spec}, {"options", a.common.options}});
  return 0;
}

int cmd_lrtest(Session& s, const Args& a) {
  const auto opts = s.options();
  const auto data = s.data();
  const auto full = s.estimate(data, a.full, opts.fit);
  s.require_converged(full);
  const auto restricted = s.estimate(data, a.restricted, opts.fit);
  s.require_converged(restricted);
  s.stage = "likelihood-ratio test";
  int df = a.df;
  if (df <= 0) {
    df = static_cast<int>(full.free_parameters()) - static_cast<int>(restricted.free_parameters());
    if (df <= 0) throw Error(ErrorCode::InvalidArgument, "the full model has no extra parameters; pass --df");
  }
  const auto t = lr_test(full, restricted, df);
  s.out() << "LL_full = " << std::setprecision(10) << full.ll << ", LL_restricted = " << restricted.ll << "\n";
  s.out() << "stat = " << format_double(t.stat) << ", df = " << t.df << ", p = " << format_double(t.p_value) << "\n";
  if (!a.common.out.empty()) {
    s.write("lrtest.csv", "full,restricted,ll_full,ll_restricted,stat,df,p\n" + csv_field(full.spec.label()) + "," +
                              csv_field(restricted.spec.label()) + "," + format_double(full.ll) + "," +
                              format_double(restricted.ll) + "," + format_double(t.stat) + "," +
                              std::to_string(t.df) + "," + format_double(t.p_value) + "\n");
    s.manifest({{"data", a.common.data}, {"full", a.full}, {"restricted", a.restricted}});
  }
  return 0;
}

int cmd_crossval(Session& s, const Args& a) {
  const auto opts = s.options();
  const auto data = s.data();
  std::vector<ModelSpec> specs;
  for (const auto& p : a.specs) {
    s.stage = "spec " + p;
    specs.push_back(load_spec(p));
    validate_spec(specs.back(), data);
  }
  s.stage = "fold assignment";
  const auto plan = make_folds(data, a.k, a.common.seed);
  for (const auto& w : plan.warnings) s.out() << "warning: " << w << "\n";
  s.stage = "cross-validation";
  CvOptions cv;
  cv.fit = opts.fit;
  cv.fit.compute_hessian = false;
  const auto result = cross_validate(data, specs, plan, cv);
  s.write("cv.csv", result.to_csv());
  auto ranking = result.summary;
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const CvSummary& x, const CvSummary& y) { return x.mean_test_ll > y.mean_test_ll; });
  s.out() << "k = " << a.k << ", seed = " << a.common.seed << "; ranked by mean held-out LL\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const auto& r = ranking[i];
    s.out() << (i + 1) << ". " << r.spec << ": test " << std::setprecision(10) << r.mean_test_ll << ", train "
            << r.mean_train_ll << " (" << r.successful << " folds";
    if (r.failed > 0) s.out() << ", " << r.failed << " failed";
    s.out() << ")\n";
  }
  std::string joined;
  for (const auto& p : a.specs) joined += (joined.empty() ? "" : ",") + p;
  s.manifest({{"data", a.common.data}, {"specs", joined}, {"k", std::to_string(a.k)}});
  if (std::any_of(result.summary.begin(), result.summary.end(),
                  [](const CvSummary& r) { return r.successful == 0; })) {
    throw Error(ErrorCode::EstimationFailure, "a model failed on every fold");
  }
  return 0;
}

int cmd_simulate(Session& s, const Args& a) {
  s.stage = "simulation config";
  auto cfg = load_simulation(a.config);
  cfg.seed = a.common.seed;
  s.stage = "simulation";
  const auto data = simulate(cfg);
  s.write("data.csv", to_csv(data));
  s.out() << "simulated " << data.n_obs() << " observations (" << data.n_rows() << " rows), seed "
          << a.common.seed << "\n";
  for (const auto& [alt, share] : observed_shares(data)) s.out() << "  alt " << alt << ": share " << share << "\n";
  s.manifest({{"config", a.config}});
  return 0;
}

int cmd_policy_sweep(Session& s, const Args& a) {
  const auto opts = s.options();
  const auto data = s.data();
  s.stage = "scenario";
  const auto scenario = load_scenario(a.scenario);
  scenario.validate(data);
  std::vector<SweepTable> tables;
  for (const auto& p : a.specs) {
    const auto m = s.model(data, p, opts.fit);
    s.stage = "sweep with " + m.spec.label();
    tables.push_back(sweep(data, m.spec, m.params, scenario));
  }
  s.write("sweep.csv", sweep_csv(tables));
  for (const auto& t : tables) {
    s.out() << t.model << " (" << t.parameter << " from " << format_double(t.rows.front().sweep_value) << " to "
            << format_double(t.rows.back().sweep_value) << ")\n";
    for (const auto& [alt, share] : t.rows.front().share) {
      s.out() << "  alt " << alt << ": share " << std::setprecision(6) << share << " -> "
              << t.rows.back().share.at(alt) << "\n";
    }
  }
  std::string joined;
  for (const auto& p : a.specs) joined += (joined.empty() ? "" : ",") + p;
  s.manifest({{"data", a.common.data}, {"models", joined}, {"scenario", a.scenario}});
  return 0;
}

int cmd_policy_target(Session& s, const Args& a) {
  const auto opts = s.options();
  const auto data = s.data();
  s.stage = "targeting config";
  const auto cfg = load_targeting(a.targeting);
  TargetingProblem problem;
  problem.selection = s.model(data, a.selection, opts.fit);
  problem.truth = s.model(data, a.truth.empty() ? a.selection : a.truth, opts.fit);
  problem.target_alt = cfg.target_alt;
  problem.cost_column = cfg.cost_column;
  problem.related_alts = cfg.related_alts;
  problem.pass_multiplier = cfg.pass_multiplier;
  problem.skip_unaffordable = cfg.skip_unaffordable;
  s.stage = "targeting";
  const auto ranked = rank_targets(data, problem);
  std::vector<TargetingResult> results;
  for (double b : cfg.budgets) results.push_back(select_targets(ranked, b, cfg.skip_unaffordable));
  s.write("targeting.csv", targeting_csv(results));
  s.write("targeting_summary.csv", targeting_summary_csv(results));
  s.out() << "selection " << problem.selection.spec.label() << ", truth " << problem.truth.spec.label() << ", "
          << ranked.rows.size() << " eligible, " << ranked.excluded << " excluded\n";
  for (const auto& r : results) {
    s.out() << "  budget " << format_double(r.budget) << ": " << r.n_selected << " selected, cost "
            << format_double(r.total_cost) << ", truth gain " << std::setprecision(6) << r.truth_gain
            << ", efficiency " << r.efficiency << "\n";
  }
  s.manifest({{"data", a.common.data},
              {"selection", a.selection},
              {"truth", a.truth},
              {"targeting", a.targeting}});
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool needs_data = true) {
  if (needs_data) {
    sub->add_option("--data", c.data, "Long-format choice CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--schema", c.schema, "Column mapping JSON")->check(CLI::ExistingFile);
    sub->add_option("--options", c.options, "Estimation options JSON")->check(CLI::ExistingFile);
  }
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--seed", c.seed, "Master random seed");
  sub->add_option("--threads", c.threads, "Worker thread cap (0 = all cores)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Logit-type discrete choice models: estimation, inference, validation and policy analysis"};
  app.require_subcommand(1);
  Args a;

  auto* est = app.add_subcommand("estimate", "Fit one model by maximum likelihood");
  add_common(est, a.common);
  est->add_option("--spec", a.spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
  est->add_option("--bootstrap", a.replicates, "BCa bootstrap replicates (0 = none)");

  auto* boot = app.add_subcommand("bootstrap", "Fit one model and compute BCa intervals");
  add_common(boot, a.common);
  boot->add_option("--spec", a.spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
  boot->add_option("--replicates,-B", a.replicates, "Bootstrap replicates (default from options, else 1000)");

  auto* lr = app.add_subcommand("lrtest", "Likelihood-ratio test of a restricted against a full model");
  add_common(lr, a.common);
  lr->add_option("--full", a.full, "Full model spec")->required()->check(CLI::ExistingFile);
  lr->add_option("--restricted", a.restricted, "Restricted model spec")->required()->check(CLI::ExistingFile);
  lr->add_option("--df", a.df, "Degrees of freedom (default: difference in free parameters)");

  auto* cv = app.add_subcommand("crossval", "Stratified k-fold cross-validation of several specs");
  add_common(cv, a.common);
  cv->add_option("--specs", a.specs, "Model spec JSONs")->required()->delimiter(',')->check(CLI::ExistingFile);
  cv->add_option("--k", a.k, "Number of folds");

  auto* sim = app.add_subcommand("simulate", "Simulate a choice dataset from a known model");
  add_common(sim, a.common, false);
  sim->add_option("--config", a.config, "Simulation config JSON")->required()->check(CLI::ExistingFile);

  auto* ps = app.add_subcommand("policy-sweep", "Sample enumeration over a scenario grid");
  add_common(ps, a.common);
  ps->add_option("--models,--specs", a.specs, "Spec JSONs (fitted on --data) or saved params.json files")
      ->required()
      ->delimiter(',')
      ->check(CLI::ExistingFile);
  ps->add_option("--scenario", a.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);

  auto* pt = app.add_subcommand("policy-target", "Budget-constrained targeting of a free pass");
  add_common(pt, a.common);
  pt->add_option("--selection", a.selection, "Model used to rank individuals")->required()->check(CLI::ExistingFile);
  pt->add_option("--truth", a.truth, "Model used to score the selection (default: selection)")
      ->check(CLI::ExistingFile);
  pt->add_option("--targeting", a.targeting, "Targeting JSON")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  set_max_threads(a.common.threads);
  Session s(chosen->get_name(), a, out);
  try {
    if (chosen == est) return cmd_estimate(s, a, false);
    if (chosen == boot) return cmd_estimate(s, a, true);
    if (chosen == lr) return cmd_lrtest(s, a);
    if (chosen == cv) return cmd_crossval(s, a);
    if (chosen == sim) return cmd_simulate(s, a);
    if (chosen == ps) return cmd_policy_sweep(s, a);
    if (chosen == pt) return cmd_policy_target(s, a);
  } catch (const Error& e) {
    err << "error during " << s.stage << ": " << e.what() << "\n";
    switch (category(e.code())) {
      case ErrorCategory::Config: return kExitConfig;
      case ErrorCategory::Data: return kExitData;
      case ErrorCategory::Estimation: return kExitEstimation;
    }
  } catch (const std::exception& e) {
    err << "error during " << s.stage << ": " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace logitype
