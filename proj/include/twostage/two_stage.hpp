#pragma once

// Two-stage reinforcement prediction.
//
// Stage one holds one regressor per primary reinforcer, each predicting that
// reinforcer's salience (never negative when rectified). Stage two reads out
// reward value as sum_k value_weight_k * satiety_k * salience_k. Channels
// learn from their own reinforcer's outcome only, never from the summed value.

#include <concepts>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twostage/dataset.hpp"
#include "twostage/errors.hpp"
#include "twostage/linear_models.hpp"

namespace twostage {

template <class P>
concept ReinforcerPredictor = requires(const P& p, std::span<const double> x) {
  { p.predict(x) } -> std::convertible_to<double>;
  { p.dimension() } -> std::convertible_to<std::size_t>;
};

/// Rectified LMS predictor, or plain LMS when `rectified` is false.
struct LinearPredictor {
  LinearWeights weights;
  bool rectified = true;

  double predict(std::span<const double> x) const {
    return rectified ? rectified_predict(weights, x) : lms_predict(weights, x);
  }
  std::size_t dimension() const noexcept { return weights.dimension(); }

  friend bool operator==(const LinearPredictor&, const LinearPredictor&) = default;
};

template <ReinforcerPredictor Predictor>
struct ReinforcerChannel {
  std::string reinforcer_id;
  Predictor predictor;
  double value_weight = 1.0;
  double satiety = 1.0;  // in [0, 1]; 0 neutralises the reinforcer's value
};

template <ReinforcerPredictor Predictor = LinearPredictor>
class TwoStageModel {
 public:
  using Channel = ReinforcerChannel<Predictor>;

  explicit TwoStageModel(std::vector<Channel> channels) : channels_(std::move(channels)) {
    for (std::size_t a = 0; a < channels_.size(); ++a) {
      check_satiety(channels_[a].satiety);
      for (std::size_t b = 0; b < a; ++b)
        if (channels_[a].reinforcer_id == channels_[b].reinforcer_id)
          throw std::invalid_argument("duplicate reinforcer '" + channels_[a].reinforcer_id + "'");
      if (channels_[a].predictor.dimension() != channels_.front().predictor.dimension())
        throw DimensionMismatch(channels_.front().predictor.dimension(),
                                channels_[a].predictor.dimension());
    }
  }

  const std::vector<Channel>& channels() const noexcept { return channels_; }

  const Channel& channel(std::string_view id) const {
    for (const auto& c : channels_)
      if (c.reinforcer_id == id) return c;
    throw std::out_of_range("unknown reinforcer '" + std::string(id) + "'");
  }

  std::size_t dimension() const noexcept {
    return channels_.empty() ? 0 : channels_.front().predictor.dimension();
  }

  /// Copy with one channel's satiety replaced. Learned predictors are untouched.
  TwoStageModel with_satiety(std::string_view id, double satiety) const {
    check_satiety(satiety);
    auto channels = channels_;
    bool found = false;
    for (auto& c : channels)
      if (c.reinforcer_id == id) c.satiety = satiety, found = true;
    if (!found) throw std::out_of_range("unknown reinforcer '" + std::string(id) + "'");
    return TwoStageModel(std::move(channels));
  }

  std::map<std::string, double> predict_reinforcers(std::span<const double> x) const {
    check_input(x);
    std::map<std::string, double> out;
    for (const auto& c : channels_) out.emplace(c.reinforcer_id, c.predictor.predict(x));
    return out;
  }

  double predict_value(std::span<const double> x) const {
    check_input(x);
    double value = 0.0;
    for (const auto& c : channels_) value += c.value_weight * c.satiety * c.predictor.predict(x);
    return value;
  }

 private:
  static void check_satiety(double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("satiety must lie in [0, 1]");
  }
  void check_input(std::span<const double> x) const {
    if (x.size() != dimension()) throw DimensionMismatch(dimension(), x.size());
  }

  std::vector<Channel> channels_;
};

/// Trains one predictor per reinforcer of `data` on that reinforcer's outcome
/// column, with value weights taken from the dataset. `reports`, if given,
/// receives one FitReport per channel in reinforcer order.
inline TwoStageModel<> train_two_stage(const Dataset& data, const TrainingConfig& config,
                                       bool rectified, std::vector<FitReport>* reports = nullptr) {
  std::vector<TwoStageModel<>::Channel> channels;
  if (reports) reports->clear();
  const auto kind = rectified ? ModelKind::RectifiedLms : ModelKind::Lms;
  for (std::size_t k = 0; k < data.reinforcer_ids().size(); ++k) {
    const auto& id = data.reinforcer_ids()[k];
    FitResult fit;
    try {
      fit = train(kind, data.regression_set(id), config);
    } catch (const TrainingFailure& e) {
      throw TrainingFailure("training failed", e.epoch(), id);
    }
    if (reports) reports->push_back(fit.report);
    channels.push_back({id, LinearPredictor{std::move(fit.weights), rectified},
                        data.reinforcer_weights()[k], 1.0});
  }
  return TwoStageModel<>(std::move(channels));
}

}  // namespace twostage
