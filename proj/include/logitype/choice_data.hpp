#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace logitype {

using AltId = std::int64_t;
using ObsId = std::int64_t;

/// Maps CSV headers onto the roles of a long-format choice file.
struct Schema {
  std::string obs_id = "obs_id";
  std::string alt_id = "alt_id";
  std::string chosen = "chosen";
  /// Weight column. When unset, a column literally named "weight" is used if
  /// present; otherwise every observation gets weight 1.
  std::optional<std::string> weight;
  /// Covariate columns in order. Empty means every remaining column.
  std::vector<std::string> covariates;
};

/// One row of a long-format file: an (observation, available alternative) pair.
struct ChoiceRow {
  ObsId obs_id = 0;
  AltId alt_id = 0;
  bool chosen = false;
  double weight = 1.0;
  std::vector<double> covariates;
};

/// Immutable long-format multinomial choice data.
///
/// Rows are grouped by observation, in order of first appearance in the
/// input, and keep their input order within an observation. The presence of
/// a row encodes availability of that alternative. Construction validates:
/// one chosen row per observation, at least two rows per observation, no
/// repeated (obs_id, alt_id) pair, and a constant non-negative weight per
/// observation.
class ChoiceDataset {
 public:
  struct Observation {
    ObsId id = 0;
    double weight = 1.0;
    std::size_t begin = 0;       // first row
    std::size_t end = 0;         // one past the last row
    std::size_t chosen_row = 0;  // absolute row index of the chosen alternative
  };

  ChoiceDataset() = default;

  /// Validates and groups `rows`. `alternatives` may name extra alternative
  /// ids that never appear in a row; the global set is their union.
  static ChoiceDataset from_rows(std::vector<std::string> columns, std::vector<ChoiceRow> rows,
                                 std::span<const AltId> alternatives = {});

  std::size_t n_obs() const { return observations_.size(); }
  std::size_t n_rows() const { return row_alt_.size(); }
  std::size_t n_alternatives() const { return alternatives_.size(); }
  std::size_t n_columns() const { return columns_.size(); }

  /// Sorted global alternative ids (J = size()).
  std::span<const AltId> alternatives() const { return alternatives_; }
  std::optional<std::size_t> alt_index(AltId alt) const;

  const std::vector<std::string>& columns() const { return columns_; }
  std::optional<std::size_t> column_index(const std::string& name) const;
  /// Throws MissingColumn.
  std::size_t require_column(const std::string& name) const;

  std::span<const Observation> observations() const { return observations_; }
  const Observation& observation(std::size_t i) const { return observations_[i]; }

  AltId row_alt(std::size_t r) const { return alternatives_[row_alt_[r]]; }
  std::size_t row_alt_index(std::size_t r) const { return row_alt_[r]; }
  bool row_chosen(std::size_t r) const { return row_chosen_[r] != 0; }
  double x(std::size_t r, std::size_t c) const { return covariates_[r * columns_.size() + c]; }
  std::span<const double> row_covariates(std::size_t r) const {
    return {covariates_.data() + r * columns_.size(), columns_.size()};
  }
  /// Row-major n_rows x n_columns covariate block.
  std::span<const double> covariates() const { return covariates_; }

  /// Alternative index chosen in observation i.
  std::size_t chosen_alt_index(std::size_t i) const {
    return row_alt_[observations_[i].chosen_row];
  }

  double total_weight() const;

  /// Builds a dataset from the listed observations (duplicates allowed). With
  /// `renumber`, observation ids become 0..k-1 in selection order, which
  /// keeps resamples valid when an observation is drawn more than once. The
  /// global alternative set is preserved.
  ChoiceDataset select(std::span<const std::size_t> obs_indices, bool renumber) const;

  /// Same structure with a replacement covariate block.
  ChoiceDataset with_covariates(std::vector<double> covariates) const;

  /// Same structure with replacement observation weights.
  ChoiceDataset with_weights(std::span<const double> weights) const;

 private:
  std::vector<std::string> columns_;
  std::vector<AltId> alternatives_;
  std::vector<Observation> observations_;
  std::vector<std::size_t> row_alt_;
  std::vector<unsigned char> row_chosen_;
  std::vector<double> covariates_;
};

/// Reads a long-format CSV. Errors (MissingColumn, DuplicateAltForObs,
/// NoChoiceForObs, MultipleChoicesForObs, NonNumericCell) name the offending
/// line or observation.
ChoiceDataset load_csv(const std::filesystem::path& path, const Schema& schema = {});
ChoiceDataset parse_csv(const std::string& text, const Schema& schema = {});

/// Writes obs_id, alt_id, chosen, weight followed by the covariate columns.
void write_csv(const ChoiceDataset& data, const std::filesystem::path& path);
std::string to_csv(const ChoiceDataset& data);

/// Weighted share of observations choosing each alternative. Every global
/// alternative is present in the result (possibly with share 0).
std::map<AltId, double> observed_shares(const ChoiceDataset& data);

}  // namespace logitype
