#include "logitype/validation.hpp"

#include <limits>

#include "logitype/error.hpp"
#include "logitype/io.hpp"
#include "logitype/likelihood.hpp"
#include "logitype/parallel.hpp"
#include "logitype/random.hpp"

namespace logitype {

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan make_folds(const ChoiceDataset& data, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
  if (k > data.n_obs()) {
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k) + " exceeds the " + std::to_string(data.n_obs()) + " observations");
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(data.n_obs(), 0);
  std::vector<std::vector<std::size_t>> strata(data.n_alternatives());
  for (std::size_t i = 0; i < data.n_obs(); ++i) strata[data.chosen_alt_index(i)].push_back(i);

  Rng rng(seed);
  std::size_t dealt = 0;
  for (std::size_t j = 0; j < strata.size(); ++j) {
    auto& s = strata[j];
    if (!s.empty() && s.size() < k) {
      plan.warnings.push_back("alternative " + std::to_string(data.alternatives()[j]) + " is chosen by only " +
                              std::to_string(s.size()) + " observations, fewer than k");
    }
    for (std::size_t m = s.size(); m > 1; --m) std::swap(s[m - 1], s[rng.below(m)]);
    for (std::size_t i : s) plan.assignment[i] = dealt++ % k;
  }
  return plan;
}

CvResult cross_validate(const ChoiceDataset& data, const std::vector<ModelSpec>& specs, const FoldPlan& plan,
                        const CvOptions& options) {
  if (plan.assignment.size() != data.n_obs()) {
    throw Error(ErrorCode::InvalidArgument, "fold plan does not cover the dataset");
  }
  if (!options.inits.empty() && options.inits.size() != specs.size()) {
    throw Error(ErrorCode::InvalidArgument, "need one init entry per spec");
  }
  for (const auto& spec : specs) validate_spec(spec, data);

  EstimationOptions fit_options = options.fit;
  fit_options.compute_hessian = false;
  const std::size_t k = plan.k;
  CvResult result;
  result.folds.resize(specs.size() * k);
  parallel_for(result.folds.size(), [&](std::size_t t) {
    const std::size_t s = t / k;
    const std::size_t f = t % k;
    FoldResult& out = result.folds[t];
    out.spec = specs[s].label();
    out.fold = f;
    try {
      const auto train = data.select(plan.train_indices(f), false);
      const auto test = data.select(plan.test_indices(f), false);
      const auto init = options.inits.empty() ? std::nullopt : options.inits[s];
      const auto r = fit(train, specs[s], init, fit_options);
      out.train_ll = r.ll;
      out.test_ll = LikelihoodKernel(test, specs[s]).log_likelihood(r.mle, fit_options.use_weights);
      out.status = std::string(to_string(r.status));
      out.ok = true;
    } catch (const Error& e) {
      out.status = std::string("failed: ") + e.what();
    }
  });

  for (std::size_t s = 0; s < specs.size(); ++s) {
    CvSummary sum;
    sum.spec = specs[s].label();
    for (std::size_t f = 0; f < k; ++f) {
      const auto& r = result.folds[s * k + f];
      if (!r.ok) {
        ++sum.failed;
        continue;
      }
      ++sum.successful;
      sum.mean_train_ll += r.train_ll;
      sum.mean_test_ll += r.test_ll;
    }
    if (sum.successful > 0) {
      sum.mean_train_ll /= static_cast<double>(sum.successful);
      sum.mean_test_ll /= static_cast<double>(sum.successful);
    } else {
      sum.mean_train_ll = sum.mean_test_ll = std::numeric_limits<double>::quiet_NaN();
    }
    result.summary.push_back(sum);
  }
  return result;
}

std::string CvResult::to_csv() const {
  std::string out = "spec,fold,train_ll,test_ll,status\n";
  for (const auto& r : folds) {
    out += csv_field(r.spec) + "," + std::to_string(r.fold) + "," + (r.ok ? format_double(r.train_ll) : "") + "," +
           (r.ok ? format_double(r.test_ll) : "") + "," + csv_field(r.status) + "\n";
  }
  for (const auto& s : summary) {
    out += csv_field(s.spec) + ",mean," + format_double(s.mean_train_ll) + "," + format_double(s.mean_test_ll) + "," +
           csv_field(std::to_string(s.successful) + " ok, " + std::to_string(s.failed) + " failed") + "\n";
  }
  return out;
}

}  // namespace logitype
