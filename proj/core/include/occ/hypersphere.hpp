#pragma once

#include <span>
#include <string>
#include <vector>

#include "occ/matrix.hpp"
#include "occ/mlp.hpp"

namespace occ {

enum class CenterPolicy { MeanOfInitialOutputs, FixedVector, MeanOfInputs };
enum class Decision { Target, Other };

std::string toString(CenterPolicy policy);
CenterPolicy parseCenterPolicy(const std::string& name);
std::string toString(Decision decision);

struct HypersphereState {
  std::vector<double> center;
  double radius = 0.0;
  double threshold = 0.0;
  CenterPolicy centerPolicy = CenterPolicy::MeanOfInitialOutputs;
};

/// Floor used when every distance in a batch is zero.
inline constexpr double kRadiusFloor = 1e-6;

std::vector<double> initCenter(CenterPolicy policy, const ModelParams& model,
                               const Matrix& trainInputs,
                               std::span<const double> fixedCenter = {});

/// Linear interpolation between closest ranks: h = q (n - 1),
/// x[floor h] + (h - floor h) (x[ceil h] - x[floor h]) over sorted values.
double quantile(std::span<const double> values, double q);

/// R = 2 max D_i.
double radiusLbl(std::span<const double> distances);
/// R = quantile(D, q).
double radiusQuantileSlack(std::span<const double> distances, double q);
/// R^2 = quantile(D^2, 1 - nu).
double radiusSblQuantile(std::span<const double> squaredDistances, double nu);

/// eta = quantile(errors, 1 - rejectFraction).
double computeThreshold(std::span<const double> trainErrors, double rejectFraction);

/// error <= eta -> Target.
Decision decide(double error, double eta) noexcept;

}  // namespace occ
