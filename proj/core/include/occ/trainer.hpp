#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "occ/data.hpp"
#include "occ/hypersphere.hpp"
#include "occ/losses.hpp"
#include "occ/metrics.hpp"
#include "occ/mlp.hpp"

namespace occ {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batchSize = 64;
  double learningRate = 0.01;
  std::uint64_t seed = 42;
  LossConfig loss;
  double rejectFraction = 0.1;
  bool shuffle = true;
  std::size_t hiddenDim = 32;
  std::size_t outputDim = 8;  // forced to 1 for HRN
  Activation activation;
  CenterPolicy centerPolicy = CenterPolicy::MeanOfInitialOutputs;
  std::vector<double> fixedCenter;

  void validate() const;
};

struct TrainedModel {
  ModelParams params;
  HypersphereState sphere;
  std::vector<double> lossHistory;  // mean batch objective per epoch
  TrainConfig config;
};

/// Snapshot handed to the observer after every optimizer step.
struct BatchTrace {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  double radius = 0.0;
  bool radiusUpdated = false;
  std::vector<double> distances;  // before the step, against the current center
  double loss = 0.0;
};

using BatchObserver = std::function<void(const BatchTrace&)>;

/// Radius rule for the configured loss applied to one batch of distances.
/// MSE-OCL and HRN have no radius and return 0.
double scheduleRadius(std::span<const double> distances, const LossConfig& cfg);

/// Trains on split.trainTargets (which must be normalized) and fits the
/// decision threshold on the final training errors.
TrainedModel train(const OccSplit& split, const TrainConfig& cfg,
                   const BatchObserver& observer = {});

/// Anomaly error per row: distance to the center, or -log Sig(phi) for HRN.
std::vector<double> anomalyErrors(const TrainedModel& model, const Matrix& inputs);

struct Prediction {
  double error = 0.0;
  Decision decision = Decision::Target;
};

std::vector<Prediction> predict(const TrainedModel& model, const Matrix& inputs);

/// Test-set scores paired with their labels.
std::vector<ScoredSample> scoreTestSet(const TrainedModel& model, const OccSplit& split);

EvaluationReport evaluate(const TrainedModel& model, const OccSplit& split);

}  // namespace occ
