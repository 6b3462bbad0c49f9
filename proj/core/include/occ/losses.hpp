#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "occ/matrix.hpp"

namespace occ {

enum class LossKind { MseOcl, Sbl, Hrn, Lbl, LblSig };

std::string toString(LossKind kind);
/// Accepts MSE_OCL, SBL, HRN, LBL, LBLSIG (case-insensitive).
LossKind parseLossKind(const std::string& name);

struct LossConfig {
  LossKind kind = LossKind::LblSig;
  double theta = 1.0;            // barrier approximation precision
  double qTrunc = 10.0;          // LBLSig relaxation constant Q
  double lambda = 1e-3;          // weight decay (MSE-OCL, LBL, LBLSig); H-regularizer weight (HRN)
  double lambda1 = 1.0;          // SBL hinge weight
  double lambda2 = 1e-3;         // SBL weight decay
  double nu = 0.1;               // SBL quantile fraction
  double hrnExponent = 2.0;      // q in ||grad_x phi||^q
  double radiusQuantile = 0.9;   // LBLSig radius quantile
  std::size_t radiusUpdatePeriod = 1;  // batches between radius updates
  double epsLog = 1e-12;         // floor on -u before the logarithm
  bool discardOutside = false;   // LBLSig: drop samples with D > R

  void validate() const;

  /// Coefficient of the (1/2)||W||^2 term for this loss kind.
  double weightDecay() const noexcept;

  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

/// Per-batch loss evaluation. `gradScales[i]` is the coefficient of
/// dD_i^2/dW in the weight gradient; `outputGrad` is dLoss/dOutputs.
struct BatchLossResult {
  std::vector<double> distances;
  std::vector<double> margins;  // D_i^2 - R^2
  std::vector<double> probs;    // Sig(-u_i), LBLSig only
  std::vector<double> gradScales;
  std::vector<double> penaltyScales;  // HRN: dLoss/dPenalty_i
  double lossValue = 0.0;
  Matrix outputGrad;
  std::size_t samplesTruncated = 0;
};

double sigmoid(double x) noexcept;
/// log(1 + e^x) without overflow.
double softplus(double x) noexcept;

/// Euclidean distance of each output row to the center.
std::vector<double> distance(const Matrix& outputs, std::span<const double> center);

BatchLossResult lblLoss(std::span<const double> distances, double radius, const LossConfig& cfg);
BatchLossResult lblsigLoss(std::span<const double> distances, double radius,
                           const LossConfig& cfg);
BatchLossResult mseOclLoss(std::span<const double> distances);
BatchLossResult sblLoss(std::span<const double> distances, double radius, const LossConfig& cfg);

/// `jacobianPenalties[i]` is ||grad_x phi(x_i)||_F^2.
BatchLossResult hrnLoss(const Matrix& outputs, std::span<const double> jacobianPenalties,
                        const LossConfig& cfg);

/// Fills result.outputGrad with row i = 2 * gradScales[i] * (outputs_i - center).
void attachSphereOutputGrad(BatchLossResult& result, const Matrix& outputs,
                            std::span<const double> center);

/// Per-sample barrier value -(1/theta) log(max(-u, epsLog)).
double barrierValue(double u, double theta, double epsLog = 0.0) noexcept;

struct BarrierPoint {
  double theta;
  double u;
  double value;
};

/// Exact barrier samples for plotting; every u must be negative.
std::vector<BarrierPoint> barrierCurve(std::span<const double> thetaValues,
                                       std::span<const double> uGrid);

/// `points` values of u evenly spaced on [-uMax, -uMin].
std::vector<double> barrierGrid(double uMin, double uMax, std::size_t points);

}  // namespace occ
