#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "logitype/choice_data.hpp"
#include "logitype/cli.hpp"
#include "logitype/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = LOGITYPE_FIXTURES;

std::string fx(const std::string& name) { return (kFixtures / name).string(); }

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "logitype");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = logitype::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("logitype_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) { return logitype::read_text_file(p); }

}  // namespace

TEST_CASE("estimate writes parameter tables and a manifest") {
  const auto dir = scratch("estimate");
  const auto r = cli({"estimate", "--data", fx("mnl_data.csv"), "--spec", fx("specs/mnl.json"), "--out", dir.string(),
                      "--seed", "5"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "params.csv"));
  CHECK(fs::exists(dir / "ll_by_alt.csv"));
  CHECK(slurp(dir / "params.csv").rfind("parameter,estimate,natural\nbeta_cost,", 0) == 0);
  CHECK(r.out.find("beta_time") != std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["command"] == "estimate");
  const auto saved = nlohmann::json::parse(slurp(dir / "params.json"));
  double total = 0.0;
  for (const auto& [k, v] : saved["ll_by_alt"].items()) total += v.get<double>();
  CHECK(std::abs(total - saved["ll"].get<double>()) < 1e-8);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  const auto a = scratch("boot_a");
  const auto b = scratch("boot_b");
  const std::vector<std::string> base{"bootstrap", "--data",     fx("mnl_data.csv"), "--spec",
                                      fx("specs/mnl.json"), "-B", "30", "--seed", "3", "--options", fx("options.json")};
  auto args_a = base;
  args_a.insert(args_a.end(), {"--out", a.string(), "--threads", "1"});
  auto args_b = base;
  args_b.insert(args_b.end(), {"--out", b.string(), "--threads", "4"});
  REQUIRE(cli(args_a).code == 0);
  const auto rb = cli(args_b);
  REQUIRE(rb.code == 0);
  for (const char* f : {"params.csv", "ll_by_alt.csv", "intervals.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  CHECK(rb.out.find("**") != std::string::npos);
}

TEST_CASE("lrtest prints the statistic, df and p-value") {
  const auto r = cli({"lrtest", "--data", fx("scobit_data.csv"), "--full", fx("specs/uneven_logit.json"),
                      "--restricted", fx("specs/mnl.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("stat = ") != std::string::npos);
  CHECK(r.out.find("df = 3") != std::string::npos);
  CHECK(r.out.find("p = ") != std::string::npos);
}

TEST_CASE("crossval ranks scobit above mnl on scobit data") {
  const auto dir = scratch("cv");
  const auto r = cli({"crossval", "--data", fx("scobit_data.csv"), "--k", "10", "--seed", "1", "--specs",
                      fx("specs/mnl.json") + "," + fx("specs/scobit.json"), "--out", dir.string()});
  REQUIRE(r.code == 0);
  double mnl = 0.0, scobit = 0.0;
  std::istringstream csv(slurp(dir / "cv.csv"));
  std::string line;
  while (std::getline(csv, line)) {
    const auto f = logitype::split_csv_line(line);
    if (f.size() >= 4 && f[1] == "mean") (f[0] == "mnl" ? mnl : scobit) = std::stod(f[3]);
  }
  CHECK(scobit > mnl);
  CHECK(r.out.find("1. scobit") != std::string::npos);
}

TEST_CASE("simulate reproduces the bundled fixture") {
  const auto dir = scratch("sim");
  REQUIRE(cli({"simulate", "--config", fx("sim_mnl.json"), "--seed", "7", "--out", dir.string()}).code == 0);
  CHECK(slurp(dir / "data.csv") == slurp(kFixtures / "mnl_data.csv"));
  const auto other = scratch("sim2");
  REQUIRE(cli({"simulate", "--config", fx("sim_mnl.json"), "--seed", "8", "--out", other.string()}).code == 0);
  CHECK(slurp(other / "data.csv") != slurp(dir / "data.csv"));
}

TEST_CASE("policy-sweep conserves the weighted total at every grid point") {
  const auto dir = scratch("sweep");
  REQUIRE(cli({"policy-sweep", "--data", fx("mnl_data.csv"), "--models", fx("specs/mnl.json"), "--scenario",
               fx("toll.json"), "--out", dir.string()})
              .code == 0);
  const double total = static_cast<double>(logitype::load_csv(kFixtures / "mnl_data.csv").n_obs());
  std::map<std::string, double> sums;
  std::istringstream csv(slurp(dir / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "model,toll,alt_id,expected,share");
  while (std::getline(csv, line)) {
    const auto f = logitype::split_csv_line(line);
    sums[f[1]] += std::stod(f[3]);
  }
  CHECK(sums.size() == 11);
  for (const auto& [k, v] : sums) CHECK(std::abs(v - total) < 1e-9 * total);
}

TEST_CASE("policy-target reuses a saved fit") {
  const auto fit = scratch("target_fit");
  REQUIRE(cli({"estimate", "--data", fx("mnl_data.csv"), "--spec", fx("specs/mnl.json"), "--out", fit.string()})
              .code == 0);
  const auto dir = scratch("target");
  const auto r = cli({"policy-target", "--data", fx("mnl_data.csv"), "--selection", (fit / "params.json").string(),
                      "--targeting", fx("pass.json"), "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto summary = slurp(dir / "targeting_summary.csv");
  CHECK(summary.rfind("budget,n_selected,total_cost,truth_gain,efficiency\n100,", 0) == 0);
  CHECK(fs::exists(dir / "targeting.csv"));
}

TEST_CASE("exit codes") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"estimate", "--spec", fx("specs/mnl.json")}).code == 2);
  CHECK(cli({"estimate", "--data", fx("mnl_data.csv"), "--spec", "/no/such/spec.json"}).code == 2);
  CHECK(cli({"--help"}).code == 0);

  const auto dir = scratch("errors");
  fs::create_directories(dir);
  logitype::write_text_file(dir / "bad.csv", "obs_id,alt_id,chosen,cost,time\n7,1,1,1,1\n7,2,1,1,1\n");
  auto r = cli({"estimate", "--data", (dir / "bad.csv").string(), "--spec", fx("specs/mnl.json"), "--out",
                (dir / "o").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("MultipleChoicesForObs") != std::string::npos);

  logitype::write_text_file(dir / "spec.json", R"({"transform": "mnl", "ref_alt": 9, "coefficients": []})");
  CHECK(cli({"estimate", "--data", fx("mnl_data.csv"), "--spec", (dir / "spec.json").string(), "--out",
             (dir / "o").string()})
            .code == 3);

  logitype::write_text_file(dir / "typo.json", R"({"transform": "mlogit", "ref_alt": 1, "coefficients": []})");
  CHECK(cli({"estimate", "--data", fx("mnl_data.csv"), "--spec", (dir / "typo.json").string(), "--out",
             (dir / "o").string()})
            .code == 2);

  logitype::write_text_file(dir / "opts.json", R"({"max_iter": 1, "tol_grad": 1e-14})");
  r = cli({"estimate", "--data", fx("mnl_data.csv"), "--spec", fx("specs/mnl.json"), "--options",
           (dir / "opts.json").string(), "--out", (dir / "o").string()});
  CHECK(r.code == 4);
  CHECK(r.err.find("estimation of mnl") != std::string::npos);
}
