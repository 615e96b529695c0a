#include "twostage/harness.hpp"

#include <gtest/gtest.h>

#include "twostage/model_io.hpp"

namespace twostage {
namespace {

const ExperimentReport& default_report() {
  static const ExperimentReport r = run_table_experiment(default_training_config(), default_svr_params(4));
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t end; (end = text.find('\n', start)) != std::string::npos; start = end + 1)
    out.push_back(text.substr(start, end - start));
  return out;
}

TEST(RoundTenths, HalfAwayFromZero) {
  EXPECT_EQ(round_tenths(0.25), 0.3);
  EXPECT_EQ(round_tenths(-0.25), -0.3);
  EXPECT_EQ(round_tenths(-1.558), -1.6);
  EXPECT_EQ(round_tenths(0.6069), 0.6);
  EXPECT_EQ(round_tenths(-0.04), 0.0);
  EXPECT_FALSE(std::signbit(round_tenths(-0.04)));
}

TEST(RunTableExperiment, ReproducesPublishedErrors) {
  const auto& r = default_report();
  ASSERT_EQ(r.rows.size(), 16u);
  EXPECT_NEAR(r.error("2S-F"), 0.0, 1e-3);
  EXPECT_NEAR(r.error("2S-P"), 0.0, 1e-3);
  EXPECT_NEAR(r.error("LR-F"), 0.25, 1e-3);
  EXPECT_NEAR(r.error("LR-P"), 0.375, 1e-3);
  EXPECT_NEAR(r.error("SV-F"), 0.0, 0.02);
  EXPECT_NEAR(r.error("SV-P"), 0.22, 0.05);
  for (const auto& c : check_report(r)) EXPECT_TRUE(c.passed) << c.id << ": " << c.detail;
}

TEST(RunTableExperiment, ErrorsAreRecomputedFromRows) {
  auto r = default_report();
  const auto stored = r.average_absolute_error;
  r.recompute_errors();
  EXPECT_EQ(r.average_absolute_error, stored);
  for (std::size_t c = 0; c < kModelColumnCount; ++c) {
    double sum = 0.0;
    for (const auto& row : r.rows) sum += std::abs(row.predictions[c] - row.rv);
    EXPECT_NEAR(stored[c], sum / 16.0, 1e-15);
  }
}

TEST(RunTableExperiment, TrainingFailureNamesColumn) {
  TrainingConfig config;
  config.sigma = 1e-300;
  config.learning_rate_override = 1e300;
  try {
    run_table_experiment(config, default_svr_params(4));
    FAIL() << "expected ColumnFailure";
  } catch (const ColumnFailure& e) {
    EXPECT_EQ(e.column(), "LR-F");
  }
  SvrParams svr = default_svr_params(4);
  svr.max_iterations = 1;
  try {
    run_table_experiment({}, svr);
    FAIL() << "expected ColumnFailure";
  } catch (const ColumnFailure& e) {
    EXPECT_EQ(e.column(), "SV-F");
  }
}

TEST(RenderReport, ZeroReportCsv) {
  ExperimentReport r;
  for (int i = 1; i <= 16; ++i) {
    ReportRow row;
    row.number = i;
    row.features = table_row_features(i);
    r.rows.push_back(row);
  }
  r.recompute_errors();
  const auto out = lines(render_report(r, ReportFormat::Csv, Rounding::Tenths));
  ASSERT_EQ(out.size(), 18u);
  EXPECT_EQ(out[0], "No.,PR,OP,NR,ON,P,N,RV,LR-F,LR-P,SV-F,SV-P,2S-F,2S-P");
  EXPECT_EQ(out[1], "1,0,0,0,0,0,0,0,0,0,0,0,0,0");
  EXPECT_EQ(out[16], "16,1,1,1,1,0,0,0,0,0,0,0,0,0");
  EXPECT_EQ(out[17], "Average Absolute Error,,,,,,,,0,0,0,0,0,0");
}

TEST(RenderReport, MarkdownRowSeven) {
  const auto out = lines(render_report(default_report(), ReportFormat::Markdown, Rounding::Tenths));
  ASSERT_EQ(out.size(), 19u);
  EXPECT_EQ(out[8], "| 7 | 0 | 1 | 1 | 0 | 0 | 1 | -1 | -1 | -2 | -1 | -1.6 | -1 | -1 |");
  EXPECT_EQ(out[18].rfind("| Average Absolute Error |", 0), 0u);
  EXPECT_NE(out[18].find("| 0.25 | 0.375 |"), std::string::npos);
}

TEST(RenderReport, Deterministic) {
  for (auto f : {ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Json})
    for (auto rounding : {Rounding::Tenths, Rounding::Raw})
      EXPECT_EQ(render_report(default_report(), f, rounding), render_report(default_report(), f, rounding));
  const auto again = run_table_experiment(default_training_config(), default_svr_params(4));
  EXPECT_EQ(render_report(again, ReportFormat::Json, Rounding::Raw),
            render_report(default_report(), ReportFormat::Json, Rounding::Raw));
}

TEST(RenderReport, JsonRawRoundTrip) {
  const auto text = render_report(default_report(), ReportFormat::Json, Rounding::Raw);
  EXPECT_EQ(report_from_json(nlohmann::json::parse(text)), default_report());
}

TEST(CheckReport, FlagsDeviations) {
  auto r = default_report();
  r.rows[6].predictions[column_index("2S-P")] = -0.5;
  r.recompute_errors();
  bool flagged = false;
  for (const auto& c : check_report(r))
    if (c.id == "2S-P") flagged = !c.passed;
  EXPECT_TRUE(flagged);
}

TEST(ModelIo, RoundTripPreservesPredictions) {
  const auto full = generate_conditioned_inhibition(Variant::Full);
  std::vector<ModelFile> files;
  files.push_back({"RV", LinearModelFile{ModelKind::Lms, train(ModelKind::Lms, full.regression_set("RV"), {}).weights, 1e-4}});
  files.push_back(
      {"P", LinearModelFile{ModelKind::RectifiedLms, train(ModelKind::RectifiedLms, full.regression_set("P"), {}).weights, 1e-4}});
  files.push_back({"RV", svr_fit(full.regression_set("RV"), default_svr_params(4))});
  files.push_back({"RV", TwoStageModelFile{train_two_stage(full, {}, true).with_satiety("N", 0.5), 1e-4}});
  for (const auto& f : files) {
    const auto back = model_from_json(nlohmann::json::parse(model_to_json(f).dump()));
    EXPECT_EQ(back.target, f.target);
    EXPECT_EQ(back.model.index(), f.model.index());
    for (const auto& r : full.records()) EXPECT_EQ(back.predict(r.input()), f.predict(r.input()));
  }
}

TEST(ModelIo, RejectsMalformed) {
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"format":"other"})")), ParseError);
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"format":"twostage-model","target":"RV","kind":"lms"})")),
               ParseError);
  EXPECT_THROW(
      model_from_json(nlohmann::json::parse(R"({"format":"twostage-model","target":"RV","kind":"tree"})")),
      ParseError);
}

}  // namespace
}  // namespace twostage
