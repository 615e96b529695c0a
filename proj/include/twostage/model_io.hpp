#pragma once

// Trained-model files: one JSON object per file.
//
//   {"format": "twostage-model", "version": 1, "kind": K, "target": T, ...}
//
//   K = "lms" | "rlms"  "sigma": s, "weights": [phi...]
//   K = "svr"           "params": {"cost", "epsilon", "kernel": {"type": "rbf", "gamma"} |
//                       {"type": "linear"}, "solver_tolerance", "max_iterations"},
//                       "bias": b, "support_vectors": [[...]...], "dual_coefficients": [...]
//   K = "two-stage"     "rectified": bool, "sigma": s, "channels": [{"reinforcer", "value_weight",
//                       "satiety", "weights": [...]}...]; target is always "RV"

#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "twostage/errors.hpp"
#include "twostage/linear_models.hpp"
#include "twostage/svr.hpp"
#include "twostage/two_stage.hpp"

namespace twostage {

struct LinearModelFile {
  ModelKind kind = ModelKind::Lms;
  LinearWeights weights;
  double sigma = 1e-4;
};

struct TwoStageModelFile {
  TwoStageModel<> model;
  double sigma = 1e-4;
};

struct ModelFile {
  std::string target = "RV";
  std::variant<LinearModelFile, SvrModel, TwoStageModelFile> model;

  double predict(std::span<const double> x) const {
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, LinearModelFile>)
            return m.kind == ModelKind::Lms ? lms_predict(m.weights, x)
                                            : rectified_predict(m.weights, x);
          else if constexpr (std::is_same_v<M, SvrModel>)
            return svr_predict(m, x);
          else
            return m.model.predict_value(x);
        },
        model);
  }
};

inline nlohmann::json model_to_json(const ModelFile& file) {
  using nlohmann::json;
  json j = {{"format", "twostage-model"}, {"version", 1}, {"target", file.target}};
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinearModelFile>) {
          j["kind"] = m.kind == ModelKind::Lms ? "lms" : "rlms";
          j["sigma"] = m.sigma;
          j["weights"] = m.weights.phi;
        } else if constexpr (std::is_same_v<M, SvrModel>) {
          j["kind"] = "svr";
          json kernel;
          if (const auto* rbf = std::get_if<RbfKernel>(&m.params.kernel))
            kernel = {{"type", "rbf"}, {"gamma", rbf->gamma}};
          else
            kernel = {{"type", "linear"}};
          j["params"] = {{"cost", m.params.cost},
                         {"epsilon", m.params.epsilon_tube},
                         {"kernel", kernel},
                         {"solver_tolerance", m.params.solver_tolerance},
                         {"max_iterations", m.params.max_iterations}};
          j["bias"] = m.bias;
          j["support_vectors"] = m.support_vectors;
          j["dual_coefficients"] = m.dual_coefficients;
        } else {
          j["kind"] = "two-stage";
          j["sigma"] = m.sigma;
          const auto& channels = m.model.channels();
          j["rectified"] = channels.empty() || channels.front().predictor.rectified;
          json cs = json::array();
          for (const auto& c : channels)
            cs.push_back({{"reinforcer", c.reinforcer_id},
                          {"value_weight", c.value_weight},
                          {"satiety", c.satiety},
                          {"weights", c.predictor.weights.phi}});
          j["channels"] = cs;
        }
      },
      file.model);
  return j;
}

inline ModelFile model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "twostage-model")
      throw ParseError("not a twostage model file");
    ModelFile file;
    file.target = j.at("target").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "lms" || kind == "rlms") {
      file.model = LinearModelFile{kind == "lms" ? ModelKind::Lms : ModelKind::RectifiedLms,
                                   {j.at("weights").get<std::vector<double>>()},
                                   j.at("sigma").get<double>()};
    } else if (kind == "svr") {
      SvrModel m;
      const auto& p = j.at("params");
      m.params.cost = p.at("cost").get<double>();
      m.params.epsilon_tube = p.at("epsilon").get<double>();
      const auto& k = p.at("kernel");
      const auto type = k.at("type").get<std::string>();
      if (type == "rbf") m.params.kernel = RbfKernel{k.at("gamma").get<double>()};
      else if (type == "linear") m.params.kernel = LinearKernel{};
      else throw ParseError("unknown kernel type '" + type + "'");
      m.params.solver_tolerance = p.at("solver_tolerance").get<double>();
      m.params.max_iterations = p.at("max_iterations").get<std::size_t>();
      m.params.validate();
      m.bias = j.at("bias").get<double>();
      m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
      m.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
      if (m.support_vectors.size() != m.dual_coefficients.size())
        throw ParseError("support vector and coefficient counts differ");
      file.model = std::move(m);
    } else if (kind == "two-stage") {
      const bool rectified = j.at("rectified").get<bool>();
      std::vector<TwoStageModel<>::Channel> channels;
      for (const auto& c : j.at("channels"))
        channels.push_back({c.at("reinforcer").get<std::string>(),
                            LinearPredictor{{c.at("weights").get<std::vector<double>>()}, rectified},
                            c.at("value_weight").get<double>(), c.at("satiety").get<double>()});
      file.model = TwoStageModelFile{TwoStageModel<>(std::move(channels)), j.at("sigma").get<double>()};
    } else {
      throw ParseError("unknown model kind '" + kind + "'");
    }
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid model file: ") + e.what());
  }
}

inline void save_model(const ModelFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << model_to_json(file).dump(2) << "\n";
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace twostage
