#pragma once

// Reproduces the conditioned-inhibition comparison table: LMS, epsilon-SVR
// and the rectified two-stage model, each trained on the full and the partial
// dataset and evaluated on all 16 cue combinations.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <future>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "twostage/dataset.hpp"
#include "twostage/linear_models.hpp"
#include "twostage/svr.hpp"
#include "twostage/two_stage.hpp"

namespace twostage {

inline constexpr std::size_t kModelColumnCount = 6;
inline constexpr std::array<std::string_view, kModelColumnCount> kModelColumns = {
    "LR-F", "LR-P", "SV-F", "SV-P", "2S-F", "2S-P"};

inline std::size_t column_index(std::string_view column) {
  for (std::size_t c = 0; c < kModelColumnCount; ++c)
    if (kModelColumns[c] == column) return c;
  throw std::out_of_range("unknown model column '" + std::string(column) + "'");
}

/// A training or solver failure, labelled with the table column it broke.
class ColumnFailure : public std::runtime_error {
 public:
  ColumnFailure(std::string column, const std::string& what)
      : std::runtime_error(column + ": " + what), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

struct ReportRow {
  int number = 0;
  std::vector<std::uint8_t> features;
  std::uint8_t p = 0;
  std::uint8_t n = 0;
  double rv = 0.0;
  std::array<double, kModelColumnCount> predictions{};

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::array<double, kModelColumnCount> average_absolute_error{};

  /// Mean of |prediction - RV| per column over the raw predictions.
  void recompute_errors() {
    average_absolute_error.fill(0.0);
    if (rows.empty()) return;
    for (const auto& r : rows)
      for (std::size_t c = 0; c < kModelColumnCount; ++c)
        average_absolute_error[c] += std::abs(r.predictions[c] - r.rv);
    for (auto& e : average_absolute_error) e /= static_cast<double>(rows.size());
  }

  double error(std::string_view column) const { return average_absolute_error[column_index(column)]; }

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Published predictions (rounded to tenths) and average errors, rows 1..16.
struct ReferenceTable {
  static constexpr std::array<std::array<double, kModelColumnCount>, 16> predictions = {{
      {0, 0, 0, 0, 0, 0},
      {0.5, 1, 0, 0.6, 0, 0},
      {-0.5, -1, -1, -1, -1, -1},
      {0, 0, 0, 0, 0, 0},
      {-0.5, -1, 0, -0.6, 0, 0},
      {0, 0, 0, 0, 0, 0},
      {-1, -2, -1, -1.6, -1, -1},
      {-0.5, -1, 0, -0.6, 0, 0},
      {0.5, 1, 1, 1, 1, 1},
      {1, 2, 1, 1.6, 1, 1},
      {0, 0, 0, 0, 0, 0},
      {0.5, 1, 1, 1, 1, 1},
      {0, 0, 0, 0, 0, 0},
      {0.5, 1, 0, 0.6, 0, 0},
      {-0.5, -1, -1, -1, -1, -1},
      {0, 0, 0, 0, 0, 0},
  }};
  static constexpr std::array<double, kModelColumnCount> average_absolute_error = {
      0.25, 0.375, 0.0, 0.22, 0.0, 0.0};
};

/// Sigma 1e-4 for the linear models; cost 10, epsilon 1e-5, gamma 1/4 for SVR.
inline TrainingConfig default_training_config() { return TrainingConfig{}; }

inline ExperimentReport run_table_experiment(const TrainingConfig& config,
                                             const SvrParams& svr_params) {
  const Dataset full = generate_conditioned_inhibition(Variant::Full);
  const Dataset partial = generate_conditioned_inhibition(Variant::Partial);
  using Predictor = std::function<double(std::span<const double>)>;

  auto guarded = [](std::string_view column, auto fit) {
    return [column, fit]() -> Predictor {
      try {
        return fit();
      } catch (const std::exception& e) {
        throw ColumnFailure(std::string(column), e.what());
      }
    };
  };
  auto lms = [&config](const Dataset& d) {
    return [&config, &d]() -> Predictor {
      auto fit = train(ModelKind::Lms, d.regression_set("RV"), config);
      return [w = std::move(fit.weights)](std::span<const double> x) { return lms_predict(w, x); };
    };
  };
  auto svr = [&svr_params](const Dataset& d) {
    return [&svr_params, &d]() -> Predictor {
      auto m = svr_fit(d.regression_set("RV"), svr_params);
      return [m = std::move(m)](std::span<const double> x) { return svr_predict(m, x); };
    };
  };
  auto two_stage = [&config](const Dataset& d) {
    return [&config, &d]() -> Predictor {
      auto m = train_two_stage(d, config, true);
      return [m = std::move(m)](std::span<const double> x) { return m.predict_value(x); };
    };
  };

  // Independent trainings; run concurrently, collected in column order.
  std::array<std::future<Predictor>, kModelColumnCount> jobs = {
      std::async(std::launch::async, guarded("LR-F", lms(full))),
      std::async(std::launch::async, guarded("LR-P", lms(partial))),
      std::async(std::launch::async, guarded("SV-F", svr(full))),
      std::async(std::launch::async, guarded("SV-P", svr(partial))),
      std::async(std::launch::async, guarded("2S-F", two_stage(full))),
      std::async(std::launch::async, guarded("2S-P", two_stage(partial))),
  };
  std::array<Predictor, kModelColumnCount> models;
  for (std::size_t c = 0; c < kModelColumnCount; ++c) models[c] = jobs[c].get();

  ExperimentReport report;
  for (const auto& rec : full.records()) {
    ReportRow row;
    row.number = static_cast<int>(report.rows.size()) + 1;
    row.features = rec.features;
    row.p = rec.outcomes[0];
    row.n = rec.outcomes[1];
    row.rv = rec.reward_value;
    const auto x = rec.input();
    for (std::size_t c = 0; c < kModelColumnCount; ++c) row.predictions[c] = models[c](x);
    report.rows.push_back(std::move(row));
  }
  report.recompute_errors();
  return report;
}

// ---------------------------------------------------------------------------
// Rendering

enum class ReportFormat { Csv, Markdown, Json };
enum class Rounding { Tenths, Raw };

/// Round half away from zero to one decimal place.
inline double round_tenths(double v) {
  const double r = std::round(v * 10.0) / 10.0;
  return r == 0.0 ? 0.0 : r;
}

namespace detail {

// Shortest text that reads back to the same double.
inline std::string shortest(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fixed_trimmed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

inline std::string cell(double v, Rounding rounding) {
  return rounding == Rounding::Tenths ? fixed_trimmed(round_tenths(v), 1) : shortest(v);
}

// Error row keeps three decimals when rounding, so .375 and .22 stay legible.
inline std::string error_cell(double v, Rounding rounding) {
  return rounding == Rounding::Tenths ? fixed_trimmed(v, 3) : shortest(v);
}

inline double display_value(double v, Rounding rounding) {
  return rounding == Rounding::Tenths ? round_tenths(v) : v;
}

inline std::vector<std::string> row_cells(const ReportRow& r, Rounding rounding) {
  std::vector<std::string> cells{std::to_string(r.number)};
  for (auto f : r.features) cells.push_back(std::to_string(f));
  cells.push_back(std::to_string(r.p));
  cells.push_back(std::to_string(r.n));
  cells.push_back(shortest(r.rv));
  for (double v : r.predictions) cells.push_back(cell(v, rounding));
  return cells;
}

inline const std::vector<std::string>& header_cells() {
  static const std::vector<std::string> h = {"No.", "PR", "OP", "NR", "ON", "P",    "N",
                                             "RV",  "LR-F", "LR-P", "SV-F", "SV-P", "2S-F", "2S-P"};
  return h;
}

}  // namespace detail

inline nlohmann::json report_to_json(const ExperimentReport& r, Rounding rounding) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json preds = json::object();
    for (std::size_t c = 0; c < kModelColumnCount; ++c)
      preds[std::string(kModelColumns[c])] = detail::display_value(row.predictions[c], rounding);
    rows.push_back({{"no", row.number},
                    {"features", row.features},
                    {"P", row.p},
                    {"N", row.n},
                    {"RV", row.rv},
                    {"predictions", preds}});
  }
  json errors = json::object();
  for (std::size_t c = 0; c < kModelColumnCount; ++c)
    errors[std::string(kModelColumns[c])] = r.average_absolute_error[c];
  return {{"columns", kModelColumns}, {"rows", rows}, {"average_absolute_error", errors}};
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  for (const auto& row : j.at("rows")) {
    ReportRow out;
    out.number = row.at("no").get<int>();
    out.features = row.at("features").get<std::vector<std::uint8_t>>();
    out.p = row.at("P").get<std::uint8_t>();
    out.n = row.at("N").get<std::uint8_t>();
    out.rv = row.at("RV").get<double>();
    for (std::size_t c = 0; c < kModelColumnCount; ++c)
      out.predictions[c] = row.at("predictions").at(std::string(kModelColumns[c])).get<double>();
    r.rows.push_back(std::move(out));
  }
  for (std::size_t c = 0; c < kModelColumnCount; ++c)
    r.average_absolute_error[c] =
        j.at("average_absolute_error").at(std::string(kModelColumns[c])).get<double>();
  return r;
}

inline std::string render_report(const ExperimentReport& r, ReportFormat format, Rounding rounding) {
  if (format == ReportFormat::Json) return report_to_json(r, rounding).dump(2) + "\n";

  const auto& header = detail::header_cells();
  std::vector<std::string> error_row(8, "");
  error_row[0] = "Average Absolute Error";
  for (double e : r.average_absolute_error) error_row.push_back(detail::error_cell(e, rounding));

  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    if (format == ReportFormat::Csv) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
      out += "\n";
    } else {
      out += "|";
      for (const auto& c : cells) out += " " + c + " |";
      out += "\n";
    }
  };
  emit(header);
  if (format == ReportFormat::Markdown) {
    out += "|";
    for (std::size_t i = 0; i < header.size(); ++i) out += i < 8 ? " :-: |" : " --: |";
    out += "\n";
  }
  for (const auto& row : r.rows) emit(detail::row_cells(row, rounding));
  emit(error_row);
  return out;
}

// ---------------------------------------------------------------------------
// Golden checks against the reference table

struct GoldenCheck {
  std::string id;
  std::string description;
  bool passed = false;
  std::string detail;
};

inline std::vector<GoldenCheck> check_report(const ExperimentReport& r) {
  using Ref = ReferenceTable;
  std::vector<GoldenCheck> checks;
  auto add = [&](std::string id, std::string description, bool ok, std::string detail) {
    checks.push_back({std::move(id), std::move(description), ok, std::move(detail)});
  };
  auto worst = [&](std::size_t c, auto deviation) {
    double w = 0.0;
    int at = 0;
    for (std::size_t i = 0; i < r.rows.size() && i < 16; ++i) {
      const double d = deviation(r.rows[i], i, c);
      if (d > w) w = d, at = static_cast<int>(i) + 1;
    }
    return std::pair{w, at};
  };
  auto describe = [](std::pair<double, int> w) {
    return "max deviation " + detail::shortest(w.first) +
           (w.second ? " at row " + std::to_string(w.second) : std::string{});
  };
  const bool complete = r.rows.size() == 16;

  auto rounded_dev = [](const ReportRow& row, std::size_t i, std::size_t c) {
    return std::abs(round_tenths(row.predictions[c]) - Ref::predictions[i][c]);
  };
  for (std::size_t c : {0u, 1u}) {
    const auto w = worst(c, rounded_dev);
    add(std::string(kModelColumns[c]), "rounded predictions equal the reference column",
        complete && w.first < 1e-9, describe(w));
  }
  auto raw_dev = [](const ReportRow& row, std::size_t i, std::size_t c) {
    return std::abs(row.predictions[c] - Ref::predictions[i][c]);
  };
  {
    const auto w = worst(column_index("SV-F"), raw_dev);
    add("SV-F", "within 0.05 of the reference column", complete && w.first <= 0.05, describe(w));
  }
  {
    const auto w = worst(column_index("SV-P"), raw_dev);
    add("SV-P", "within 0.1 of the reference column", complete && w.first <= 0.1, describe(w));
  }
  auto rv_dev = [](const ReportRow& row, std::size_t, std::size_t c) {
    return std::abs(row.predictions[c] - row.rv);
  };
  for (std::size_t c : {4u, 5u}) {
    const auto w = worst(c, rv_dev);
    add(std::string(kModelColumns[c]), "equal RV on every row (raw error < 1e-3)",
        complete && w.first < 1e-3, describe(w));
  }
  const std::array<double, kModelColumnCount> error_tolerance = {1e-3, 1e-3, 0.02, 0.05, 1e-3, 1e-3};
  for (std::size_t c = 0; c < kModelColumnCount; ++c) {
    const double got = r.average_absolute_error[c];
    const double want = Ref::average_absolute_error[c];
    const double tol = error_tolerance[c];
    add("error:" + std::string(kModelColumns[c]),
        "average absolute error " + detail::shortest(want) + " +/- " + detail::shortest(tol),
        std::abs(got - want) <= tol, "got " + detail::shortest(got));
  }
  return checks;
}

}  // namespace twostage
