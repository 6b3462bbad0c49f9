#include "occ/objective.hpp"

#include <cmath>

#include "occ/error.hpp"

namespace occ {

BatchLossResult sphereLoss(std::span<const double> distances, double radius,
                           const LossConfig& cfg) {
  switch (cfg.kind) {
    case LossKind::MseOcl:
      return mseOclLoss(distances);
    case LossKind::Sbl:
      return sblLoss(distances, radius, cfg);
    case LossKind::Lbl:
      return lblLoss(distances, radius, cfg);
    case LossKind::LblSig:
      return lblsigLoss(distances, radius, cfg);
    case LossKind::Hrn:
      break;
  }
  throw UnsupportedConfigError("HRN has no hypersphere loss");
}

namespace {

std::vector<JacobianPenalty> jacobianPenalties(const ModelParams& params, const Matrix& inputs) {
  std::vector<JacobianPenalty> out;
  out.reserve(inputs.rows());
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    out.push_back(inputJacobianNormSq(params, inputs.row(i)));
  }
  return out;
}

std::vector<double> penaltyValues(const std::vector<JacobianPenalty>& penalties) {
  std::vector<double> v;
  v.reserve(penalties.size());
  for (const auto& p : penalties) v.push_back(p.value);
  return v;
}

}  // namespace

ObjectiveResult evaluateObjective(const ModelParams& params, const Matrix& inputs,
                                  std::span<const double> center, double radius,
                                  const LossConfig& cfg, ObjectiveTerms terms) {
  ForwardResult fwd = forward(params, inputs);
  ObjectiveResult result;
  result.outputs = std::move(fwd.outputs);
  result.gradients = zerosLike(params.layers);

  if (terms.data) {
    if (cfg.kind == LossKind::Hrn) {
      const auto penalties = jacobianPenalties(params, inputs);
      result.batch = hrnLoss(result.outputs, penaltyValues(penalties), cfg);
      result.gradients = backward(params, fwd.cache, result.batch.outputGrad);
      for (std::size_t i = 0; i < penalties.size(); ++i) {
        if (result.batch.penaltyScales[i] != 0.0) {
          addScaled(result.gradients, penalties[i].weightGrad, result.batch.penaltyScales[i]);
        }
      }
    } else {
      const auto d = distance(result.outputs, center);
      result.batch = sphereLoss(d, radius, cfg);
      attachSphereOutputGrad(result.batch, result.outputs, center);
      result.gradients = backward(params, fwd.cache, result.batch.outputGrad);
    }
    result.dataLoss = result.batch.lossValue;
  }
  if (terms.regularizer) {
    const double decay = cfg.weightDecay();
    result.regularization = 0.5 * decay * weightNormSq(params.layers);
    addWeightDecay(result.gradients, params.layers, decay);
  }
  result.total = result.dataLoss + result.regularization;
  return result;
}

double objectiveValue(const ModelParams& params, const Matrix& inputs,
                      std::span<const double> center, double radius, const LossConfig& cfg,
                      ObjectiveTerms terms) {
  double total = 0.0;
  if (terms.data) {
    const Matrix outputs = evaluate(params, inputs);
    if (cfg.kind == LossKind::Hrn) {
      total += hrnLoss(outputs, penaltyValues(jacobianPenalties(params, inputs)), cfg).lossValue;
    } else {
      total += sphereLoss(distance(outputs, center), radius, cfg).lossValue;
    }
  }
  if (terms.regularizer) total += 0.5 * cfg.weightDecay() * weightNormSq(params.layers);
  return total;
}

}  // namespace occ
