#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occ/losses.hpp"
#include "occ/mlp.hpp"

namespace occ {

struct ParamLocation {
  std::size_t layer = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  bool isBias = false;
};

struct GradCheckReport {
  LossKind kind = LossKind::MseOcl;
  std::uint64_t seed = 0;
  std::vector<std::size_t> dims;
  double step = 1e-5;
  double tolerance = 1e-5;
  double absTolerance = 1e-9;  // fallback for entries below `nearZero`
  double nearZero = 1e-6;
  double maxRelError = 0.0;    // over entries with max(|a|,|n|) >= nearZero
  double maxAbsError = 0.0;    // over all entries
  ParamLocation worst;
  std::size_t parametersChecked = 0;
  std::size_t samplesTruncated = 0;
  double lossValue = 0.0;
  bool passed = false;
  std::string failure;
};

struct GradCheckOptions {
  double step = 1e-5;
  /// Defaults to 1e-5, or 1e-4 for HRN.
  std::optional<double> tolerance;
  std::size_t batchSize = 8;
  Activation activation;
  /// Base loss hyperparameters; `kind` is overridden by the check.
  LossConfig loss;
  /// LBLSig: push sample 0 beyond the truncation point before checking.
  bool forceTruncatedSample = false;
  /// Drop the data term and check (lambda/2)||W||^2 alone.
  bool regularizerOnly = false;
};

/// Central differences over every weight and bias of `params` against
/// `analytic`. `objective` must hold every non-parameter quantity fixed.
GradCheckReport compareGradients(const std::function<double(const ModelParams&)>& objective,
                                 const ModelParams& params, const LayerStack& analytic,
                                 double step, double tolerance);

/// Builds a seeded model and batch, freezes center and radius, and checks the
/// analytic gradient of the full objective for `kind`. HRN forces a scalar
/// output layer.
GradCheckReport checkLossGradient(LossKind kind, std::span<const std::size_t> dims,
                                  std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace occ
