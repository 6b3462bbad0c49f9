#include "occ/hypersphere.hpp"

#include <algorithm>
#include <cmath>

#include "occ/error.hpp"

namespace occ {

std::string toString(CenterPolicy policy) {
  switch (policy) {
    case CenterPolicy::MeanOfInitialOutputs:
      return "mean_of_initial_outputs";
    case CenterPolicy::FixedVector:
      return "fixed";
    case CenterPolicy::MeanOfInputs:
      return "mean_of_inputs";
  }
  return "unknown";
}

CenterPolicy parseCenterPolicy(const std::string& name) {
  if (name == "mean_of_initial_outputs") return CenterPolicy::MeanOfInitialOutputs;
  if (name == "fixed") return CenterPolicy::FixedVector;
  if (name == "mean_of_inputs") return CenterPolicy::MeanOfInputs;
  throw ValidationError("unknown center policy '" + name +
                        "' (expected mean_of_initial_outputs, fixed, mean_of_inputs)");
}

std::string toString(Decision decision) {
  return decision == Decision::Target ? "target" : "other";
}

std::vector<double> initCenter(CenterPolicy policy, const ModelParams& model,
                               const Matrix& trainInputs, std::span<const double> fixedCenter) {
  const std::size_t outDim = model.outputDim();
  switch (policy) {
    case CenterPolicy::MeanOfInitialOutputs:
      if (trainInputs.rows() == 0) throw ValidationError("initCenter: no training inputs");
      return columnMeans(evaluate(model, trainInputs));
    case CenterPolicy::MeanOfInputs:
      if (trainInputs.rows() == 0) throw ValidationError("initCenter: no training inputs");
      if (trainInputs.cols() != outDim) {
        throw ValidationError("initCenter: mean_of_inputs needs output width " +
                              std::to_string(outDim) + " == input width " +
                              std::to_string(trainInputs.cols()));
      }
      return columnMeans(trainInputs);
    case CenterPolicy::FixedVector:
      if (fixedCenter.size() != outDim) {
        throw ValidationError("initCenter: fixed center has length " +
                              std::to_string(fixedCenter.size()) + ", model output width is " +
                              std::to_string(outDim));
      }
      return {fixedCenter.begin(), fixedCenter.end()};
  }
  throw ValidationError("initCenter: unknown policy");
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of an empty sequence");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = q * static_cast<double>(sorted.size() - 1);
  const double lo = std::floor(h);
  const auto loIdx = static_cast<std::size_t>(lo);
  const auto hiIdx = static_cast<std::size_t>(std::ceil(h));
  return sorted[loIdx] + (h - lo) * (sorted[hiIdx] - sorted[loIdx]);
}

double radiusLbl(std::span<const double> distances) {
  if (distances.empty()) throw ValidationError("radiusLbl: no distances");
  const double maxD = *std::max_element(distances.begin(), distances.end());
  if (maxD <= 0.0) return kRadiusFloor;
  return 2.0 * maxD;
}

double radiusQuantileSlack(std::span<const double> distances, double q) {
  if (distances.empty()) throw ValidationError("radiusQuantileSlack: no distances");
  if (!(q > 0.0 && q <= 1.0)) throw ValidationError("radiusQuantileSlack: q must lie in (0, 1]");
  return quantile(distances, q);
}

double radiusSblQuantile(std::span<const double> squaredDistances, double nu) {
  if (squaredDistances.empty()) throw ValidationError("radiusSblQuantile: no distances");
  if (!(nu > 0.0 && nu < 1.0)) throw ValidationError("radiusSblQuantile: nu must lie in (0, 1)");
  return quantile(squaredDistances, 1.0 - nu);
}

double computeThreshold(std::span<const double> trainErrors, double rejectFraction) {
  if (trainErrors.empty()) throw ValidationError("computeThreshold: no training errors");
  if (!(rejectFraction >= 0.0 && rejectFraction < 1.0)) {
    throw ValidationError("computeThreshold: reject fraction must lie in [0, 1)");
  }
  return quantile(trainErrors, 1.0 - rejectFraction);
}

Decision decide(double error, double eta) noexcept {
  return error <= eta ? Decision::Target : Decision::Other;
}

}  // namespace occ
