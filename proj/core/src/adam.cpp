#include "occ/adam.hpp"

#include <cmath>

#include "occ/error.hpp"

namespace occ {

AdamState AdamState::forParams(const ModelParams& params, double learningRate) {
  AdamState state;
  state.firstMoment = zerosLike(params.layers);
  state.secondMoment = zerosLike(params.layers);
  state.learningRate = learningRate;
  return state;
}

void AdamState::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ValidationError("adam: beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ValidationError("adam: beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("adam: epsilon must be positive");
  if (!(learningRate > 0.0) || !std::isfinite(learningRate)) {
    throw ValidationError("adam: learning rate must be positive and finite");
  }
}

namespace {

void updateTensor(std::span<double> param, std::span<const double> grad, std::span<double> m,
                  std::span<double> v, const AdamState& s, double corr1, double corr2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double mHat = m[i] / corr1;
    const double vHat = v[i] / corr2;
    param[i] -= s.learningRate * mHat / (std::sqrt(vHat) + s.epsilon);
  }
}

}  // namespace

void adamStep(ModelParams& params, const LayerStack& gradients, AdamState& state) {
  state.validate();
  if (!sameShape(params.layers, gradients) || !sameShape(params.layers, state.firstMoment) ||
      !sameShape(params.layers, state.secondMoment)) {
    throw DimensionError("adamStep: parameter, gradient and moment shapes differ");
  }
  ++state.stepCount;
  const double t = static_cast<double>(state.stepCount);
  const double corr1 = 1.0 - std::pow(state.beta1, t);
  const double corr2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    updateTensor(params.layers[l].weight.values(), gradients[l].weight.values(),
                 state.firstMoment[l].weight.values(), state.secondMoment[l].weight.values(),
                 state, corr1, corr2);
    updateTensor(params.layers[l].bias, gradients[l].bias, state.firstMoment[l].bias,
                 state.secondMoment[l].bias, state, corr1, corr2);
  }
}

}  // namespace occ
