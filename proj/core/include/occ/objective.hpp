#pragma once

#include <span>

#include "occ/losses.hpp"
#include "occ/mlp.hpp"

namespace occ {

/// Selects which parts of the training objective are evaluated.
struct ObjectiveTerms {
  bool data = true;
  bool regularizer = true;
};

struct ObjectiveResult {
  BatchLossResult batch;
  Matrix outputs;
  double dataLoss = 0.0;
  double regularization = 0.0;  // (weightDecay / 2) sum ||W||_F^2
  double total = 0.0;
  LayerStack gradients;
};

/// Dispatches to the per-kind loss over sphere distances. Not valid for HRN.
BatchLossResult sphereLoss(std::span<const double> distances, double radius,
                           const LossConfig& cfg);

/// Full objective and its weight gradient. `center` and `radius` are constants.
/// HRN ignores both.
ObjectiveResult evaluateObjective(const ModelParams& params, const Matrix& inputs,
                                  std::span<const double> center, double radius,
                                  const LossConfig& cfg, ObjectiveTerms terms = {});

/// Objective value only, through the forward pass and loss values.
double objectiveValue(const ModelParams& params, const Matrix& inputs,
                      std::span<const double> center, double radius, const LossConfig& cfg,
                      ObjectiveTerms terms = {});

}  // namespace occ
