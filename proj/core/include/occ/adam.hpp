#pragma once

#include <cstdint>

#include "occ/mlp.hpp"

namespace occ {

struct AdamState {
  LayerStack firstMoment;
  LayerStack secondMoment;
  std::uint64_t stepCount = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learningRate = 1e-3;

  /// Zero moments shaped like `params`.
  static AdamState forParams(const ModelParams& params, double learningRate);

  void validate() const;
};

/// One bias-corrected Adam update of every weight and bias.
void adamStep(ModelParams& params, const LayerStack& gradients, AdamState& state);

}  // namespace occ
