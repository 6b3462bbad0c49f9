#include "occ/trainer.hpp"

#include <cmath>
#include <numeric>

#include "occ/adam.hpp"
#include "occ/error.hpp"
#include "occ/objective.hpp"
#include "occ/rng.hpp"

namespace occ {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("train.epochs must be >= 1");
  if (batchSize < 1) throw ValidationError("train.batch_size must be >= 1");
  if (!(learningRate > 0.0) || !std::isfinite(learningRate)) {
    throw ValidationError("train.learning_rate must be positive and finite");
  }
  if (!(rejectFraction >= 0.0 && rejectFraction < 1.0)) {
    throw ValidationError("train.reject_fraction must lie in [0, 1)");
  }
  if (hiddenDim < 1) throw ValidationError("train.hidden_dim must be >= 1");
  if (outputDim < 1) throw ValidationError("train.output_dim must be >= 1");
  loss.validate();
}

double scheduleRadius(std::span<const double> distances, const LossConfig& cfg) {
  switch (cfg.kind) {
    case LossKind::Lbl:
      return radiusLbl(distances);
    case LossKind::LblSig:
      return radiusQuantileSlack(distances, cfg.radiusQuantile);
    case LossKind::Sbl: {
      std::vector<double> sq(distances.size());
      for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = distances[i] * distances[i];
      return std::sqrt(radiusSblQuantile(sq, cfg.nu));
    }
    case LossKind::MseOcl:
    case LossKind::Hrn:
      return 0.0;
  }
  return 0.0;
}

namespace {

bool allFinite(const LayerStack& grads) {
  for (const auto& l : grads) {
    if (!l.weight.allFinite()) return false;
    for (double b : l.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

}  // namespace

TrainedModel train(const OccSplit& split, const TrainConfig& cfg, const BatchObserver& observer) {
  cfg.validate();
  const Matrix& data = split.trainTargets;
  if (data.rows() == 0) throw ValidationError("train: the training set is empty");
  if (!split.normalized) throw ValidationError("train: the split must be normalized first");

  const bool isHrn = cfg.loss.kind == LossKind::Hrn;
  TrainedModel model;
  model.config = cfg;
  model.params = makeTwoHiddenLayerMlp(data.cols(), cfg.hiddenDim, isHrn ? 1 : cfg.outputDim,
                                       cfg.activation, deriveSeed(cfg.seed, 1));
  model.sphere.centerPolicy = cfg.centerPolicy;
  if (!isHrn) {
    model.sphere.center = initCenter(cfg.centerPolicy, model.params, data, cfg.fixedCenter);
  }

  AdamState adam = AdamState::forParams(model.params, cfg.learningRate);
  Rng shuffler(deriveSeed(cfg.seed, 2));
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double radius = 0.0;
  std::size_t step = 0;
  model.lossHistory.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffler.shuffle(order);
    double epochLoss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batchSize, ++step) {
      const std::size_t end = std::min(order.size(), start + cfg.batchSize);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix batch = selectRows(data, idx);

      BatchTrace trace;
      trace.epoch = epoch;
      trace.batch = batches;
      if (!isHrn) {
        trace.distances = distance(evaluate(model.params, batch), model.sphere.center);
        if (step % cfg.loss.radiusUpdatePeriod == 0) {
          radius = scheduleRadius(trace.distances, cfg.loss);
          trace.radiusUpdated = true;
        }
      }
      trace.radius = radius;

      const ObjectiveResult obj =
          evaluateObjective(model.params, batch, model.sphere.center, radius, cfg.loss);
      if (!std::isfinite(obj.total) || !allFinite(obj.gradients)) {
        throw TrainingError("non-finite " + toString(cfg.loss.kind) + " loss at epoch " +
                            std::to_string(epoch) + ", batch " + std::to_string(batches));
      }
      adamStep(model.params, obj.gradients, adam);

      trace.loss = obj.total;
      if (observer) observer(trace);
      epochLoss += obj.total;
      ++batches;
    }
    model.lossHistory.push_back(epochLoss / static_cast<double>(batches));
  }

  model.sphere.radius = radius;
  const auto errors = anomalyErrors(model, data);
  model.sphere.threshold = computeThreshold(errors, cfg.rejectFraction);
  return model;
}

std::vector<double> anomalyErrors(const TrainedModel& model, const Matrix& inputs) {
  const Matrix outputs = evaluate(model.params, inputs);
  if (model.config.loss.kind == LossKind::Hrn) {
    std::vector<double> errors(outputs.rows());
    for (std::size_t i = 0; i < outputs.rows(); ++i) errors[i] = softplus(-outputs(i, 0));
    return errors;
  }
  return distance(outputs, model.sphere.center);
}

std::vector<Prediction> predict(const TrainedModel& model, const Matrix& inputs) {
  const auto errors = anomalyErrors(model, inputs);
  std::vector<Prediction> out;
  out.reserve(errors.size());
  for (double e : errors) out.push_back({e, decide(e, model.sphere.threshold)});
  return out;
}

std::vector<ScoredSample> scoreTestSet(const TrainedModel& model, const OccSplit& split) {
  if (split.testFeatures.rows() == 0) return {};
  const auto errors = anomalyErrors(model, split.testFeatures);
  std::vector<ScoredSample> samples(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) samples[i] = {errors[i], split.testLabels[i]};
  return samples;
}

EvaluationReport evaluate(const TrainedModel& model, const OccSplit& split) {
  const auto samples = scoreTestSet(model, split);
  return makeReport(samples, model.sphere.threshold);
}

}  // namespace occ
