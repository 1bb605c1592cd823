#include <filesystem>

#include "doctest.h"
#include "logitype/config.hpp"
#include "logitype/error.hpp"
#include "logitype/io.hpp"

using namespace logitype;
namespace fs = std::filesystem;

namespace {

fs::path write_tmp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("logitype_cfg_" + name);
  write_text_file(p, text);
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("spec files") {
  const auto spec = load_spec(write_tmp("spec.json", R"({
    "name": "my scobit", "transform": "scobit", "ref_alt": 2,
    "coefficients": [{"name": "c", "column": "cost"}, {"column": "one", "alts": [3]}]})"));
  CHECK(spec.transform == Family::Scobit);
  CHECK(spec.label() == "my scobit");
  CHECK(spec.ref_alt == 2);
  REQUIRE(spec.coefficients.size() == 2);
  CHECK(spec.coefficients[1].name == "one");
  CHECK(spec.coefficients[1].alts == std::vector<AltId>{3});
  CHECK(load_spec(write_tmp("rt.json", spec_json(spec))).coefficients[0].column == "cost");

  CHECK(code_of([] { load_spec(write_tmp("s1.json", R"({"transform": "probit", "ref_alt": 1, "coefficients": []})")); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { load_spec(write_tmp("s2.json", R"({"transform": "mnl", "coefficients": []})")); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] {
          load_spec(write_tmp("s3.json", R"({"transform": "mnl", "ref_alt": 1, "coefficient": []})"));
        }) == ErrorCode::ConfigError);
  CHECK(code_of([] { load_spec(write_tmp("s4.json", "{not json")); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { load_spec("/no/such/file.json"); }) == ErrorCode::ConfigError);
}

TEST_CASE("options and schema") {
  const auto o = load_options(write_tmp("o.json", R"({"max_iter": 40, "use_weights": true,
    "bootstrap": {"replicates": 50, "stratified": false}})"));
  CHECK(o.fit.max_iter == 40);
  CHECK(o.fit.use_weights);
  CHECK(o.fit.tol_grad == 1e-5);
  CHECK(o.bootstrap.replicates == 50);
  CHECK_FALSE(o.bootstrap.stratified);
  CHECK(code_of([] { load_options(write_tmp("o2.json", R"({"tol_grad": -1})")); }) == ErrorCode::ConfigError);
  const auto s = load_schema(write_tmp("schema.json", R"({"obs_id": "person", "weight": "w"})"));
  CHECK(s.obs_id == "person");
  CHECK(s.alt_id == "alt_id");
  CHECK(s.weight == std::optional<std::string>("w"));
}

TEST_CASE("natural parameters by name") {
  ModelSpec spec;
  spec.transform = Family::Czado;
  spec.ref_alt = 1;
  spec.coefficients = {{"cost", "cost", {}}};
  const std::vector<AltId> alts{1, 2, 3};
  const auto p = natural_params_from_json(R"({"beta": {"cost": -2}, "tau": {"3": 0.5}, "shape": {"2": [1.5, 0.7]}})",
                                          spec, alts);
  CHECK(p.beta == std::vector<double>{-2.0});
  CHECK(p.tau == std::vector<double>{0.0, 0.0, 0.5});
  CHECK(p.shape[1] == std::vector<double>{1.5, 0.7});
  CHECK(p.shape[0] == std::vector<double>{1.0, 1.0});
  CHECK(code_of([&] { natural_params_from_json(R"({"beta": {}})", spec, alts); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { natural_params_from_json(R"({"beta": {"cost": 1}, "tau": {"4": 1}})", spec, alts); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([&] { natural_params_from_json(R"({"beta": {"cost": 1}, "shape": {"2": [-1, 1]}})", spec, alts); }) ==
        ErrorCode::ConfigError);
}

TEST_CASE("scenario grids") {
  const auto s = load_scenario(write_tmp("scen.json", R"({
    "edits": [{"column": "cost", "op": "subtract_floor0", "alts": [2],
               "where": [{"column": "time", "op": ">=", "value": 1}],
               "amount": {"column": "cost", "from_alt": 3}}],
    "sweep": {"parameter": "toll", "from": 0, "to": 1, "steps": 5}})"));
  CHECK(s.edits[0].op == EditOp::SubtractFloor0);
  CHECK(s.edits[0].where.where[0].op == RowPredicate::Condition::Op::Ge);
  CHECK(s.edits[0].amount.from_alt == std::optional<AltId>(3));
  CHECK(s.sweep->values == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(code_of([] { load_scenario(write_tmp("scen2.json", R"({"edits": [{"column": "c", "op": "divide"}]})")); }) ==
        ErrorCode::ConfigError);
  const auto t = load_targeting(write_tmp("t.json", R"({"target_alt": 4, "budgets": [10, 20]})"));
  CHECK(t.pass_multiplier == 22.0);
  CHECK(code_of([] { load_targeting(write_tmp("t2.json", R"({"target_alt": 4, "budgets": [0]})")); }) ==
        ErrorCode::ConfigError);
}

TEST_CASE("saved fits reload exactly") {
  const auto data = load_csv(fs::path(LOGITYPE_FIXTURES) / "mnl_data.csv");
  const auto spec = load_spec(fs::path(LOGITYPE_FIXTURES) / "specs" / "scobit.json");
  EstimationOptions o;
  o.max_iter = 20;
  const auto r = fit(data, spec, std::nullopt, o);
  const auto saved = load_saved_fit(write_tmp("fit.json", saved_fit_json(r)));
  REQUIRE(saved);
  CHECK(saved->packed == r.packed_mle);
  CHECK(saved->alternatives == r.alternatives);
  CHECK(saved->spec.transform == Family::Scobit);
  CHECK_FALSE(load_saved_fit(fs::path(LOGITYPE_FIXTURES) / "specs" / "mnl.json"));
}
