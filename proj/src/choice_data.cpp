#include "logitype/choice_data.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "logitype/error.hpp"
#include "logitype/io.hpp"
#include "logitype/parallel.hpp"

namespace logitype {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<ObsId, AltId>& p) const noexcept {
    return std::hash<ObsId>()(p.first) * 1000003u ^ std::hash<AltId>()(p.second);
  }
};

std::string obs_label(ObsId id) { return "obs_id " + std::to_string(id); }

}  // namespace

ChoiceDataset ChoiceDataset::from_rows(std::vector<std::string> columns, std::vector<ChoiceRow> rows,
                                       std::span<const AltId> alternatives) {
  ChoiceDataset out;
  out.columns_ = std::move(columns);

  std::set<AltId> alt_set(alternatives.begin(), alternatives.end());
  for (const auto& row : rows) alt_set.insert(row.alt_id);
  out.alternatives_.assign(alt_set.begin(), alt_set.end());

  // Group rows by observation in order of first appearance.
  std::unordered_map<ObsId, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<ObsId> group_ids;
  std::unordered_set<std::pair<ObsId, AltId>, PairHash> seen;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.covariates.size() != out.columns_.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "row " + std::to_string(r) + " has " + std::to_string(row.covariates.size()) +
                      " covariates, expected " + std::to_string(out.columns_.size()));
    }
    if (!seen.insert({row.obs_id, row.alt_id}).second) {
      throw Error(ErrorCode::DuplicateAltForObs,
                  obs_label(row.obs_id) + " lists alt_id " + std::to_string(row.alt_id) + " twice");
    }
    auto [it, inserted] = group_of.try_emplace(row.obs_id, groups.size());
    if (inserted) {
      groups.emplace_back();
      group_ids.push_back(row.obs_id);
    }
    groups[it->second].push_back(r);
  }

  const std::size_t n_cols = out.columns_.size();
  out.observations_.reserve(groups.size());
  out.row_alt_.reserve(rows.size());
  out.row_chosen_.reserve(rows.size());
  out.covariates_.reserve(rows.size() * n_cols);

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    const ObsId id = group_ids[g];
    if (members.size() < 2) {
      throw Error(ErrorCode::DegenerateChoiceSet, obs_label(id) + " has fewer than two alternatives");
    }
    Observation obs;
    obs.id = id;
    obs.weight = rows[members.front()].weight;
    obs.begin = out.row_alt_.size();
    std::size_t n_chosen = 0;
    for (std::size_t r : members) {
      const auto& row = rows[r];
      if (!(row.weight >= 0.0) || !std::isfinite(row.weight)) {
        throw Error(ErrorCode::InconsistentWeight, obs_label(id) + " has an invalid weight");
      }
      if (row.weight != obs.weight) {
        throw Error(ErrorCode::InconsistentWeight, obs_label(id) + " has differing weights across rows");
      }
      if (row.chosen) {
        ++n_chosen;
        obs.chosen_row = out.row_alt_.size();
      }
      const auto alt_pos = std::lower_bound(out.alternatives_.begin(), out.alternatives_.end(), row.alt_id);
      out.row_alt_.push_back(static_cast<std::size_t>(alt_pos - out.alternatives_.begin()));
      out.row_chosen_.push_back(row.chosen ? 1 : 0);
      out.covariates_.insert(out.covariates_.end(), row.covariates.begin(), row.covariates.end());
    }
    if (n_chosen == 0) throw Error(ErrorCode::NoChoiceForObs, obs_label(id) + " has no chosen row");
    if (n_chosen > 1) throw Error(ErrorCode::MultipleChoicesForObs, obs_label(id) + " has more than one chosen row");
    obs.end = out.row_alt_.size();
    out.observations_.push_back(obs);
  }
  return out;
}

std::optional<std::size_t> ChoiceDataset::alt_index(AltId alt) const {
  const auto it = std::lower_bound(alternatives_.begin(), alternatives_.end(), alt);
  if (it == alternatives_.end() || *it != alt) return std::nullopt;
  return static_cast<std::size_t>(it - alternatives_.begin());
}

std::optional<std::size_t> ChoiceDataset::column_index(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns_.begin());
}

std::size_t ChoiceDataset::require_column(const std::string& name) const {
  if (auto idx = column_index(name)) return *idx;
  throw Error(ErrorCode::MissingColumn, "covariate column '" + name + "' not found");
}

double ChoiceDataset::total_weight() const {
  std::vector<double> w(observations_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = observations_[i].weight;
  return pairwise_sum(w.data(), w.size());
}

ChoiceDataset ChoiceDataset::select(std::span<const std::size_t> obs_indices, bool renumber) const {
  ChoiceDataset out;
  out.columns_ = columns_;
  out.alternatives_ = alternatives_;
  out.observations_.reserve(obs_indices.size());
  const std::size_t n_cols = columns_.size();
  for (std::size_t k = 0; k < obs_indices.size(); ++k) {
    const auto& src = observations_.at(obs_indices[k]);
    Observation obs = src;
    if (renumber) obs.id = static_cast<ObsId>(k);
    obs.begin = out.row_alt_.size();
    obs.chosen_row = obs.begin + (src.chosen_row - src.begin);
    for (std::size_t r = src.begin; r < src.end; ++r) {
      out.row_alt_.push_back(row_alt_[r]);
      out.row_chosen_.push_back(row_chosen_[r]);
      out.covariates_.insert(out.covariates_.end(), covariates_.begin() + r * n_cols,
                             covariates_.begin() + (r + 1) * n_cols);
    }
    obs.end = out.row_alt_.size();
    out.observations_.push_back(obs);
  }
  if (!renumber) {
    std::unordered_set<ObsId> ids;
    for (const auto& obs : out.observations_) {
      if (!ids.insert(obs.id).second) {
        throw Error(ErrorCode::InvalidArgument,
                    "selection repeats " + obs_label(obs.id) + "; use renumber for resamples");
      }
    }
  }
  return out;
}

ChoiceDataset ChoiceDataset::with_covariates(std::vector<double> covariates) const {
  if (covariates.size() != covariates_.size()) {
    throw Error(ErrorCode::InvalidArgument, "covariate block has the wrong size");
  }
  ChoiceDataset out = *this;
  out.covariates_ = std::move(covariates);
  return out;
}

ChoiceDataset ChoiceDataset::with_weights(std::span<const double> weights) const {
  if (weights.size() != observations_.size()) {
    throw Error(ErrorCode::InvalidArgument, "weight vector has the wrong size");
  }
  ChoiceDataset out = *this;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw Error(ErrorCode::InconsistentWeight, "invalid weight for " + obs_label(out.observations_[i].id));
    }
    out.observations_[i].weight = weights[i];
  }
  return out;
}

namespace {

template <typename T>
T parse_integer(const std::string& cell, std::size_t line, const std::string& column) {
  T value{};
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    // Accept integral values written as floats, e.g. "3.0".
    double d = 0.0;
    auto [p2, ec2] = std::from_chars(first, last, d);
    if (ec2 == std::errc() && p2 == last && d == static_cast<double>(static_cast<T>(d))) {
      return static_cast<T>(d);
    }
    throw Error(ErrorCode::NonNumericCell,
                "line " + std::to_string(line) + ", column '" + column + "': '" + cell + "' is not an integer");
  }
  return value;
}

double parse_real(const std::string& cell, std::size_t line, const std::string& column) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last || !std::isfinite(value)) {
    throw Error(ErrorCode::NonNumericCell,
                "line " + std::to_string(line) + ", column '" + column + "': '" + cell + "' is not a number");
  }
  return value;
}

}  // namespace

ChoiceDataset parse_csv(const std::string& text, const Schema& schema) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MissingColumn, "empty file, no header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const auto header = split_csv_line(line);

  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  auto require = [&](const std::string& name) {
    if (auto idx = find(name)) return *idx;
    throw Error(ErrorCode::MissingColumn, "required column '" + name + "' not found in header");
  };

  const std::size_t obs_col = require(schema.obs_id);
  const std::size_t alt_col = require(schema.alt_id);
  const std::size_t chosen_col = require(schema.chosen);
  std::optional<std::size_t> weight_col;
  if (schema.weight) {
    weight_col = require(*schema.weight);
  } else {
    weight_col = find("weight");
  }

  std::vector<std::size_t> cov_cols;
  std::vector<std::string> cov_names;
  if (schema.covariates.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == obs_col || i == alt_col || i == chosen_col || (weight_col && i == *weight_col)) continue;
      cov_cols.push_back(i);
      cov_names.push_back(header[i]);
    }
  } else {
    for (const auto& name : schema.covariates) {
      cov_cols.push_back(require(name));
      cov_names.push_back(name);
    }
  }

  std::vector<ChoiceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::NonNumericCell, "line " + std::to_string(line_no) + " has " +
                                                 std::to_string(cells.size()) + " fields, header has " +
                                                 std::to_string(header.size()));
    }
    ChoiceRow row;
    row.obs_id = parse_integer<ObsId>(cells[obs_col], line_no, header[obs_col]);
    row.alt_id = parse_integer<AltId>(cells[alt_col], line_no, header[alt_col]);
    const auto chosen = parse_integer<int>(cells[chosen_col], line_no, header[chosen_col]);
    if (chosen != 0 && chosen != 1) {
      throw Error(ErrorCode::NonNumericCell,
                  "line " + std::to_string(line_no) + ": chosen must be 0 or 1, got '" + cells[chosen_col] + "'");
    }
    row.chosen = chosen == 1;
    row.weight = weight_col ? parse_real(cells[*weight_col], line_no, header[*weight_col]) : 1.0;
    row.covariates.reserve(cov_cols.size());
    for (std::size_t c : cov_cols) row.covariates.push_back(parse_real(cells[c], line_no, header[c]));
    rows.push_back(std::move(row));
  }
  return ChoiceDataset::from_rows(std::move(cov_names), std::move(rows));
}

ChoiceDataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::ConfigError, "data file not readable: " + path.string());
  }
  return parse_csv(text, schema);
}

std::string to_csv(const ChoiceDataset& data) {
  std::string out = "obs_id,alt_id,chosen,weight";
  for (const auto& c : data.columns()) out += "," + c;
  out += "\n";
  for (const auto& obs : data.observations()) {
    for (std::size_t r = obs.begin; r < obs.end; ++r) {
      out += std::to_string(obs.id) + "," + std::to_string(data.row_alt(r)) + "," +
             (data.row_chosen(r) ? "1" : "0") + "," + format_double(obs.weight);
      for (double v : data.row_covariates(r)) out += "," + format_double(v);
      out += "\n";
    }
  }
  return out;
}

void write_csv(const ChoiceDataset& data, const std::filesystem::path& path) {
  write_text_file(path, to_csv(data));
}

std::map<AltId, double> observed_shares(const ChoiceDataset& data) {
  const std::size_t J = data.n_alternatives();
  std::vector<std::vector<double>> per_alt(J);
  for (std::size_t i = 0; i < data.n_obs(); ++i) {
    per_alt[data.chosen_alt_index(i)].push_back(data.observation(i).weight);
  }
  const double total = data.total_weight();
  std::map<AltId, double> shares;
  for (std::size_t j = 0; j < J; ++j) {
    const double w = pairwise_sum(per_alt[j].data(), per_alt[j].size());
    shares[data.alternatives()[j]] = total > 0.0 ? w / total : 0.0;
  }
  return shares;
}

}  // namespace logitype
