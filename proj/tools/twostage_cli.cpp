// Command-line runner for the conditioned-inhibition experiment.
//
// Exit codes: 0 success, 1 usage or input error, 2 training failure,
// 3 golden-check failure (run-table --check).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "twostage/dataset.hpp"
#include "twostage/harness.hpp"
#include "twostage/model_io.hpp"

namespace {

using namespace twostage;

constexpr int kExitUsage = 1;
constexpr int kExitTraining = 2;
constexpr int kExitCheck = 3;

struct SvrFlags {
  double cost = 10.0;
  double epsilon = 1e-5;
  std::optional<double> gamma;

  void add_to(CLI::App* app) {
    app->add_option("--svr-cost", cost, "SVR cost C")->check(CLI::PositiveNumber);
    app->add_option("--svr-epsilon", epsilon, "SVR epsilon-tube half width")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--svr-gamma", gamma, "RBF gamma (default 1 / number of features)")
        ->check(CLI::PositiveNumber);
  }

  SvrParams params(std::size_t n_features) const {
    SvrParams p = default_svr_params(n_features);
    p.cost = cost;
    p.epsilon_tube = epsilon;
    if (gamma) p.kernel = RbfKernel{*gamma};
    return p;
  }
};

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
}

int run_table(double sigma, const SvrFlags& svr, const std::string& format,
              const std::string& rounding, bool check, const std::string& out) {
  TrainingConfig config = default_training_config();
  config.sigma = sigma;
  const auto report = run_table_experiment(config, svr.params(4));
  const auto fmt = format == "csv"        ? ReportFormat::Csv
                   : format == "markdown" ? ReportFormat::Markdown
                                          : ReportFormat::Json;
  write_output(render_report(report, fmt, rounding == "raw" ? Rounding::Raw : Rounding::Tenths),
               out);
  if (!check) return 0;
  bool all = true;
  for (const auto& c : check_report(report)) {
    std::fprintf(stderr, "%s %-8s %s (%s)\n", c.passed ? "PASS" : "FAIL", c.id.c_str(),
                 c.description.c_str(), c.detail.c_str());
    all = all && c.passed;
  }
  return all ? 0 : kExitCheck;
}

int train_model(const std::string& kind, const std::string& data_path, const std::string& target,
                const std::string& out, double sigma, const SvrFlags& svr) {
  const Dataset data = load_dataset(data_path);
  TrainingConfig config = default_training_config();
  config.sigma = sigma;
  ModelFile file;
  file.target = target;
  if (kind == "lms" || kind == "rlms") {
    const auto model_kind = kind == "lms" ? ModelKind::Lms : ModelKind::RectifiedLms;
    auto fit = train(model_kind, data.regression_set(target), config);
    if (!fit.report.converged)
      std::fprintf(stderr, "warning: stopped after %zu epochs without converging\n",
                   fit.report.epochs_run);
    file.model = LinearModelFile{model_kind, std::move(fit.weights), sigma};
  } else if (kind == "svr") {
    file.model = svr_fit(data.regression_set(target), svr.params(data.dimension()));
  } else {
    if (target != "RV") throw CLI::ValidationError("--target", "two-stage predicts RV only");
    file.model = TwoStageModelFile{train_two_stage(data, config, true), sigma};
  }
  const std::string text = model_to_json(file).dump(2) + "\n";
  write_output(text, out);
  return 0;
}

int predict(const std::string& model_path, const std::string& data_path, const std::string& out) {
  const ModelFile file = load_model(model_path);
  const Dataset data = load_dataset(data_path);
  const auto* two_stage = std::get_if<TwoStageModelFile>(&file.model);
  std::string text = "row,prediction";
  if (two_stage)
    for (const auto& c : two_stage->model.channels()) text += ",salience_" + c.reinforcer_id;
  text += "\n";
  std::size_t row = 0;
  for (const auto& rec : data.records()) {
    const auto x = rec.input();
    text += std::to_string(++row) + "," + detail::shortest(file.predict(x));
    if (two_stage) {
      const auto saliences = two_stage->model.predict_reinforcers(x);
      for (const auto& c : two_stage->model.channels())
        text += "," + detail::shortest(saliences.at(c.reinforcer_id));
    }
    text += "\n";
  }
  write_output(text, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage reinforcement prediction experiments"};
  app.require_subcommand(1);

  auto* table = app.add_subcommand("run-table", "Train all six models and print the comparison table");
  double sigma = 1e-4;
  SvrFlags svr;
  std::string format = "markdown", rounding = "tenths", out;
  bool check = false;
  table->add_option("--sigma", sigma, "Noise scale for the linear models")->check(CLI::PositiveNumber);
  svr.add_to(table);
  table->add_option("--format", format)->check(CLI::IsMember({"csv", "markdown", "json"}));
  table->add_option("--round", rounding)->check(CLI::IsMember({"tenths", "raw"}));
  table->add_flag("--check", check, "Compare against the reference table; exit 3 on mismatch");
  table->add_option("--out", out, "Write to file instead of stdout");

  auto* gen = app.add_subcommand("gen-data", "Write the full or partial dataset as CSV");
  std::string variant;
  gen->add_option("--variant", variant)->required()->check(CLI::IsMember({"full", "partial"}));
  gen->add_option("--out", out)->required();

  auto* trn = app.add_subcommand("train", "Train one model on a CSV dataset");
  std::string model_kind, data_path, target = "RV";
  trn->add_option("--model", model_kind)
      ->required()
      ->check(CLI::IsMember({"lms", "rlms", "svr", "two-stage"}));
  trn->add_option("--data", data_path)->required();
  trn->add_option("--target", target)->check(CLI::IsMember({"RV", "P", "N"}));
  trn->add_option("--out", out)->required();
  trn->add_option("--sigma", sigma)->check(CLI::PositiveNumber);
  svr.add_to(trn);

  auto* pred = app.add_subcommand("predict", "Apply a trained model to every row of a dataset");
  std::string model_path;
  pred->add_option("--model-file", model_path)->required();
  pred->add_option("--data", data_path)->required();
  pred->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*table) return run_table(sigma, svr, format, rounding, check, out);
    if (*gen) {
      save_dataset(generate_conditioned_inhibition(variant == "full" ? Variant::Full : Variant::Partial),
                   out);
      return 0;
    }
    if (*trn) return train_model(model_kind, data_path, target, out, sigma, svr);
    if (*pred) return predict(model_path, data_path, out);
  } catch (const TrainingFailure& e) {
    std::fprintf(stderr, "training failed: %s\n", e.what());
    return kExitTraining;
  } catch (const ConvergenceFailure& e) {
    std::fprintf(stderr, "training failed: %s\n", e.what());
    return kExitTraining;
  } catch (const ColumnFailure& e) {
    std::fprintf(stderr, "training failed: %s\n", e.what());
    return kExitTraining;
  } catch (const InvalidTarget& e) {
    std::fprintf(stderr, "training failed: %s\n", e.what());
    return kExitTraining;
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
