#include <cmath>

#include "doctest.h"
#include "logitype/error.hpp"
#include "logitype/model.hpp"
#include "logitype/random.hpp"

using namespace logitype;

namespace {

ModelSpec spec_for(Family f) {
  ModelSpec s;
  s.transform = f;
  s.ref_alt = 2;
  s.coefficients = {{"cost", "cost", {}}, {"asc_walk", "one", {3}}};
  return s;
}

const std::vector<AltId> kAlts{1, 2, 3, 5};

}  // namespace

TEST_CASE("packed layout order and names") {
  const ParameterLayout mnl(spec_for(Family::Mnl), kAlts);
  CHECK(mnl.names() == std::vector<std::string>{"beta_cost", "beta_asc_walk", "tau_1", "tau_3", "tau_5"});
  const ParameterLayout sc(spec_for(Family::Scobit), kAlts);
  CHECK(sc.size() == 9);
  CHECK(sc.names().back() == "upsilon_5");
  ModelSpec asym = spec_for(Family::AsymLogit);
  asym.shape_ref_alt = 3;
  const ParameterLayout as(asym, kAlts);
  CHECK(as.n_shape() == 3);
  CHECK(as.names()[5] == "phi_1");
  CHECK(as.names()[7] == "phi_5");
  const ParameterLayout cz(spec_for(Family::Czado), kAlts);
  CHECK(cz.n_shape() == 8);
  CHECK(cz.names()[5] == "upsilon1_1");
  CHECK(cz.names()[6] == "upsilon2_1");
  // shape_ref_alt defaults to ref_alt for the asymmetric logit.
  CHECK(ParameterLayout(spec_for(Family::AsymLogit), kAlts).shape_ref_index() == 1);
}

TEST_CASE("pack(unpack(v)) == v and any vector is admissible") {
  for (Family f : all_families()) {
    const ParameterLayout layout(spec_for(f), kAlts);
    Rng rng(static_cast<std::uint64_t>(f) + 3);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> v(layout.size());
      for (double& x : v) x = rng.normal(0.0, 2.0);
      const auto p = layout.unpack(v);
      CHECK_NOTHROW(layout.validate(p));
      const auto back = layout.pack(p);
      for (std::size_t k = 0; k < v.size(); ++k) CHECK(std::abs(back[k] - v[k]) <= 1e-12 * std::max(1.0, std::abs(v[k])));
      CHECK(p.tau[1] == 0.0);
    }
    std::vector<double> zeros(layout.size(), 0.0);
    CHECK(layout.pack(layout.unpack(zeros)) == zeros);
  }
}

TEST_CASE("symmetric starting shapes") {
  const ParameterLayout as(spec_for(Family::AsymLogit), kAlts);
  const auto p = as.unpack(std::vector<double>(as.size(), 0.0));
  for (const auto& s : p.shape) CHECK(s[0] == 0.25);
  const ParameterLayout sc(spec_for(Family::Scobit), kAlts);
  for (const auto& s : sc.unpack(std::vector<double>(sc.size(), 0.0)).shape) CHECK(s[0] == 1.0);
}

TEST_CASE("invalid natural parameters") {
  const ParameterLayout sc(spec_for(Family::Scobit), kAlts);
  NaturalParams p{{0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}, {{1.0}, {1.0}, {-1.0}, {1.0}}};
  CHECK_THROWS_AS(sc.validate(p), Error);
  p.shape[2][0] = 1.0;
  p.tau[1] = 0.5;  // ref_alt must stay at 0
  CHECK_THROWS_AS(sc.validate(p), Error);
  const ParameterLayout as(spec_for(Family::AsymLogit), kAlts);
  NaturalParams a{{0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}, {{0.5}, {0.2}, {0.2}, {0.2}}};
  try {
    as.validate(a);
    FAIL("expected InvalidParams");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidParams);
  }
  ModelSpec bad = spec_for(Family::Mnl);
  bad.ref_alt = 9;
  CHECK_THROWS_AS(ParameterLayout(bad, kAlts), Error);
}
