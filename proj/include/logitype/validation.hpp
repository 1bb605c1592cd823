#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logitype/choice_data.hpp"
#include "logitype/estimation.hpp"

namespace logitype {

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;  // fold of each observation (by index)
  std::vector<std::string> warnings;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Shuffles each chosen-alternative stratum with Rng(seed) and deals the
/// observations round-robin, the dealing position carrying over from one
/// stratum to the next. Throws KTooLarge (k > N) / InvalidArgument (k < 2).
FoldPlan make_folds(const ChoiceDataset& data, std::size_t k, std::uint64_t seed);

struct CvOptions {
  EstimationOptions fit;
  /// Optional starting points per spec (same order as the spec list); folds
  /// otherwise start from default_init.
  std::vector<std::optional<std::vector<double>>> inits;
};

struct FoldResult {
  std::string spec;
  std::size_t fold = 0;
  double train_ll = 0.0;
  double test_ll = 0.0;
  std::string status;  // fit status, or "failed: <reason>"
  bool ok = false;
};

struct CvSummary {
  std::string spec;
  double mean_train_ll = 0.0;
  double mean_test_ll = 0.0;
  std::size_t successful = 0;
  std::size_t failed = 0;
};

struct CvResult {
  std::vector<FoldResult> folds;    // spec-major, then fold
  std::vector<CvSummary> summary;   // one per spec, input order

  /// Columns spec, fold, train_ll, test_ll, status; one "mean" row per spec.
  std::string to_csv() const;
};

/// Fits every spec on each fold's complement and scores the held-out fold.
/// Fold fits run in parallel; output order is fixed.
CvResult cross_validate(const ChoiceDataset& data, const std::vector<ModelSpec>& specs, const FoldPlan& plan,
                        const CvOptions& options = {});

}  // namespace logitype
