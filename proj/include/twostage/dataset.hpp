#pragma once

// Trial data for the dual conditioned-inhibition experiment.
//
// Four binary cue features (PR, OP, NR, ON) and two primary reinforcers
// (P rewarding, N punishing). P is delivered when PR is present without OP,
// N when NR is present without ON, and the reward value is P - N.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twostage/errors.hpp"

namespace twostage {

enum class Variant { Full, Partial, Custom };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::Partial: return "partial";
    case Variant::Custom: return "custom";
  }
  return "custom";
}

/// Inputs plus scalar targets; the common training input for every regressor.
struct RegressionSet {
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;

  std::size_t size() const noexcept { return inputs.size(); }
  std::size_t dimension() const noexcept { return inputs.empty() ? 0 : inputs.front().size(); }
};

struct TrialRecord {
  std::vector<std::uint8_t> features;
  std::vector<std::uint8_t> outcomes;  // aligned with Dataset::reinforcer_ids()
  double reward_value = 0.0;

  std::vector<double> input() const { return {features.begin(), features.end()}; }

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

class Dataset {
 public:
  /// Validates every record: binary cells, matching widths, and
  /// reward_value == sum_k weight_k * outcome_k.
  Dataset(std::vector<std::string> feature_names, std::vector<std::string> reinforcer_ids,
          std::vector<double> reinforcer_weights, std::vector<TrialRecord> records,
          Variant variant = Variant::Custom)
      : feature_names_(std::move(feature_names)),
        reinforcer_ids_(std::move(reinforcer_ids)),
        reinforcer_weights_(std::move(reinforcer_weights)),
        records_(std::move(records)),
        variant_(variant) {
    if (reinforcer_ids_.size() != reinforcer_weights_.size())
      throw std::invalid_argument("one value weight per reinforcer required");
    for (std::size_t i = 0; i < records_.size(); ++i) validate(records_[i], i + 1);
  }

  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<std::string>& reinforcer_ids() const noexcept { return reinforcer_ids_; }
  const std::vector<double>& reinforcer_weights() const noexcept { return reinforcer_weights_; }
  const std::vector<TrialRecord>& records() const noexcept { return records_; }
  Variant variant() const noexcept { return variant_; }

  std::size_t size() const noexcept { return records_.size(); }
  std::size_t dimension() const noexcept { return feature_names_.size(); }

  /// Index of a reinforcer id; throws std::out_of_range if absent.
  std::size_t reinforcer_index(std::string_view id) const {
    for (std::size_t k = 0; k < reinforcer_ids_.size(); ++k)
      if (reinforcer_ids_[k] == id) return k;
    throw std::out_of_range("unknown reinforcer '" + std::string(id) + "'");
  }

  /// Target "RV" selects the reward value; anything else names a reinforcer.
  RegressionSet regression_set(std::string_view target) const {
    RegressionSet out;
    out.inputs.reserve(records_.size());
    out.targets.reserve(records_.size());
    const bool rv = target == "RV";
    const std::size_t k = rv ? 0 : reinforcer_index(target);
    for (const auto& r : records_) {
      out.inputs.push_back(r.input());
      out.targets.push_back(rv ? r.reward_value : static_cast<double>(r.outcomes[k]));
    }
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  void validate(const TrialRecord& r, std::size_t row) const {
    if (r.features.size() != feature_names_.size())
      throw ParseError("record has " + std::to_string(r.features.size()) + " features, expected " +
                           std::to_string(feature_names_.size()),
                       row);
    if (r.outcomes.size() != reinforcer_ids_.size())
      throw ParseError("record has wrong number of reinforcer outcomes", row);
    for (std::size_t j = 0; j < r.features.size(); ++j)
      if (r.features[j] > 1) throw ParseError("feature value must be 0 or 1", row, j + 1);
    double readout = 0.0;
    for (std::size_t k = 0; k < r.outcomes.size(); ++k) {
      if (r.outcomes[k] > 1)
        throw ParseError("outcome salience must be 0 or 1", row, r.features.size() + k + 1);
      readout += reinforcer_weights_[k] * r.outcomes[k];
    }
    if (std::abs(readout - r.reward_value) > 1e-12)
      throw ParseError("reward value " + std::to_string(r.reward_value) +
                           " inconsistent with reinforcer readout " + std::to_string(readout),
                       row, r.features.size() + r.outcomes.size() + 1);
  }

  std::vector<std::string> feature_names_;
  std::vector<std::string> reinforcer_ids_;
  std::vector<double> reinforcer_weights_;
  std::vector<TrialRecord> records_;
  Variant variant_;
};

/// 1-based table row numbers held out of the partial dataset.
inline constexpr int kPartialHeldOutRows[] = {2, 5, 7, 8, 10, 14};

inline bool is_held_out_row(int row) {
  return std::find(std::begin(kPartialHeldOutRows), std::end(kPartialHeldOutRows), row) !=
         std::end(kPartialHeldOutRows);
}

/// The 16 binary cue combinations in table order: row k encodes k-1 in
/// binary with PR as the most significant bit.
inline std::vector<std::uint8_t> table_row_features(int row) {
  const int bits = row - 1;
  return {static_cast<std::uint8_t>((bits >> 3) & 1), static_cast<std::uint8_t>((bits >> 2) & 1),
          static_cast<std::uint8_t>((bits >> 1) & 1), static_cast<std::uint8_t>(bits & 1)};
}

inline Dataset generate_conditioned_inhibition(Variant variant) {
  if (variant == Variant::Custom)
    throw std::invalid_argument("conditioned inhibition data is either full or partial");
  std::vector<TrialRecord> records;
  for (int row = 1; row <= 16; ++row) {
    if (variant == Variant::Partial && is_held_out_row(row)) continue;
    TrialRecord r;
    r.features = table_row_features(row);
    const bool pr = r.features[0], op = r.features[1], nr = r.features[2], on = r.features[3];
    const std::uint8_t p = pr && !op;
    const std::uint8_t n = nr && !on;
    r.outcomes = {p, n};
    r.reward_value = static_cast<double>(p) - static_cast<double>(n);
    records.push_back(std::move(r));
  }
  return Dataset({"PR", "OP", "NR", "ON"}, {"P", "N"}, {1.0, -1.0}, std::move(records), variant);
}

/// `copies` concatenated copies of `data`, then a seeded Fisher-Yates shuffle.
/// The permutation depends only on (size, seed), not on the standard library.
inline Dataset replicate_and_shuffle(const Dataset& data, std::size_t copies, std::uint64_t seed) {
  if (copies == 0) throw std::invalid_argument("copies must be >= 1");
  std::vector<TrialRecord> records;
  records.reserve(data.size() * copies);
  for (std::size_t c = 0; c < copies; ++c)
    records.insert(records.end(), data.records().begin(), data.records().end());

  std::mt19937_64 rng(seed);
  for (std::size_t i = records.size(); i > 1; --i) {
    // unbiased draw in [0, i)
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do draw = rng();
    while (draw >= limit);
    std::swap(records[i - 1], records[draw % bound]);
  }
  return Dataset(data.feature_names(), data.reinforcer_ids(), data.reinforcer_weights(),
                 std::move(records), Variant::Custom);
}

namespace detail {

inline std::string format_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v == 0.0 ? 0.0 : v);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::uint8_t parse_binary(const std::string& cell, std::size_t row, std::size_t col) {
  if (cell == "0") return 0;
  if (cell == "1") return 1;
  throw ParseError("expected 0 or 1, got '" + cell + "'", row, col);
}

inline double parse_real(const std::string& cell, std::size_t row, std::size_t col) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (cell.empty() || used != cell.size() || !std::isfinite(v))
    throw ParseError("expected a number, got '" + cell + "'", row, col);
  return v;
}

inline Variant infer_variant(const Dataset& d) {
  for (Variant v : {Variant::Full, Variant::Partial}) {
    const Dataset reference = generate_conditioned_inhibition(v);
    if (d.feature_names() == reference.feature_names() &&
        d.reinforcer_ids() == reference.reinforcer_ids() && d.records() == reference.records())
      return v;
  }
  return Variant::Custom;
}

}  // namespace detail

/// CSV text: header `<features...>,P,N,RV`, one LF-terminated row per trial.
inline std::string to_csv(const Dataset& data) {
  std::string out;
  for (const auto& name : data.feature_names()) out += name + ",";
  for (const auto& id : data.reinforcer_ids()) out += id + ",";
  out += "RV\n";
  for (const auto& r : data.records()) {
    for (auto f : r.features) out += std::to_string(f) + ",";
    for (auto o : r.outcomes) out += std::to_string(o) + ",";
    out += detail::format_number(r.reward_value) + "\n";
  }
  return out;
}

/// Parses CSV text produced by to_csv (or written by hand in that layout).
/// The header must end in `P,N,RV`; every earlier column is a binary feature.
/// Rows and columns in ParseError are 1-based file coordinates.
inline Dataset from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty dataset file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  const std::size_t width = header.size();
  if (width < 4 || header[width - 3] != "P" || header[width - 2] != "N" || header[width - 1] != "RV")
    throw ParseError("header must end with P,N,RV", 1);
  const std::size_t n_features = width - 3;
  std::vector<std::string> features(header.begin(), header.begin() + n_features);
  for (std::size_t j = 0; j < n_features; ++j)
    if (features[j].empty()) throw ParseError("empty feature name", 1, j + 1);

  std::vector<TrialRecord> records;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != width)
      throw ParseError("expected " + std::to_string(width) + " cells, got " +
                           std::to_string(cells.size()),
                       row);
    TrialRecord r;
    for (std::size_t j = 0; j < n_features; ++j)
      r.features.push_back(detail::parse_binary(cells[j], row, j + 1));
    for (std::size_t k = 0; k < 2; ++k)
      r.outcomes.push_back(detail::parse_binary(cells[n_features + k], row, n_features + k + 1));
    r.reward_value = detail::parse_real(cells[width - 1], row, width);
    const double readout = static_cast<double>(r.outcomes[0]) - static_cast<double>(r.outcomes[1]);
    if (std::abs(readout - r.reward_value) > 1e-12)
      throw ParseError("RV " + cells[width - 1] + " inconsistent with P - N", row, width);
    records.push_back(std::move(r));
  }

  Dataset loaded(std::move(features), {"P", "N"}, {1.0, -1.0}, std::move(records));
  const Variant v = detail::infer_variant(loaded);
  if (v == Variant::Custom) return loaded;
  return Dataset(loaded.feature_names(), loaded.reinforcer_ids(), loaded.reinforcer_weights(),
                 loaded.records(), v);
}

inline void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << to_csv(data);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv(buf.str());
}

}  // namespace twostage
