#include "occ/losses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "occ/error.hpp"

namespace occ {

std::string toString(LossKind kind) {
  switch (kind) {
    case LossKind::MseOcl:
      return "MSE_OCL";
    case LossKind::Sbl:
      return "SBL";
    case LossKind::Hrn:
      return "HRN";
    case LossKind::Lbl:
      return "LBL";
    case LossKind::LblSig:
      return "LBLSIG";
  }
  return "UNKNOWN";
}

LossKind parseLossKind(const std::string& name) {
  std::string up;
  for (char c : name) {
    if (c == '-') c = '_';
    up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (up == "MSE_OCL" || up == "MSE") return LossKind::MseOcl;
  if (up == "SBL") return LossKind::Sbl;
  if (up == "HRN") return LossKind::Hrn;
  if (up == "LBL") return LossKind::Lbl;
  if (up == "LBLSIG" || up == "LBL_SIG") return LossKind::LblSig;
  throw ValidationError("unknown loss kind '" + name +
                        "' (expected MSE_OCL, SBL, HRN, LBL, LBLSIG)");
}

void LossConfig::validate() const {
  if (!(theta > 0.0)) throw ValidationError("loss.theta must be > 0");
  if (!(qTrunc > 0.0)) throw ValidationError("loss.q must be > 0");
  if (!(lambda >= 0.0)) throw ValidationError("loss.lambda must be >= 0");
  if (!(lambda1 >= 0.0)) throw ValidationError("loss.lambda1 must be >= 0");
  if (!(lambda2 >= 0.0)) throw ValidationError("loss.lambda2 must be >= 0");
  if (!(nu > 0.0 && nu < 1.0)) throw ValidationError("loss.nu must lie in (0, 1)");
  if (!(hrnExponent >= 1.0)) throw ValidationError("loss.hrn_exponent must be >= 1");
  if (!(radiusQuantile > 0.0 && radiusQuantile <= 1.0)) {
    throw ValidationError("loss.radius_quantile must lie in (0, 1]");
  }
  if (radiusUpdatePeriod == 0) throw ValidationError("loss.radius_update_period must be >= 1");
  if (!(epsLog > 0.0)) throw ValidationError("loss.eps_log must be > 0");
}

double LossConfig::weightDecay() const noexcept {
  switch (kind) {
    case LossKind::Sbl:
      return lambda2;
    case LossKind::Hrn:
      return 0.0;  // lambda weights the H-regularizer instead
    default:
      return lambda;
  }
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) noexcept {
  if (x <= 0.0) return std::log1p(std::exp(x));
  return x + std::log1p(std::exp(-x));
}

std::vector<double> distance(const Matrix& outputs, std::span<const double> center) {
  if (center.size() != outputs.cols()) {
    throw DimensionError("distance: center length " + std::to_string(center.size()) +
                         " != output width " + std::to_string(outputs.cols()));
  }
  std::vector<double> d(outputs.rows());
  for (std::size_t i = 0; i < outputs.rows(); ++i) {
    auto r = outputs.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double diff = r[j] - center[j];
      acc += diff * diff;
    }
    d[i] = std::sqrt(acc);
  }
  return d;
}

namespace {

BatchLossResult withMargins(std::span<const double> distances, double radius) {
  BatchLossResult r;
  r.distances.assign(distances.begin(), distances.end());
  r.margins.resize(distances.size());
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    r.margins[i] = distances[i] * distances[i] - r2;
  }
  r.gradScales.assign(distances.size(), 0.0);
  return r;
}

void requireNonEmpty(std::span<const double> distances, const char* who) {
  if (distances.empty()) throw ValidationError(std::string(who) + ": empty batch");
}

}  // namespace

BatchLossResult lblLoss(std::span<const double> distances, double radius, const LossConfig& cfg) {
  requireNonEmpty(distances, "lblLoss");
  if (!(radius > 0.0)) throw ValidationError("lblLoss: radius must be > 0");
  BatchLossResult r = withMargins(distances, radius);
  const double scale = 1.0 / (static_cast<double>(distances.size()) * cfg.theta);
  double sum = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const double slack = std::max(-r.margins[i], cfg.epsLog);
    sum += std::log(slack);
    r.gradScales[i] = scale / slack;
  }
  r.lossValue = -scale * sum;
  return r;
}

BatchLossResult lblsigLoss(std::span<const double> distances, double radius,
                           const LossConfig& cfg) {
  requireNonEmpty(distances, "lblsigLoss");
  if (!(radius >= 0.0)) throw ValidationError("lblsigLoss: radius must be >= 0");
  BatchLossResult r = withMargins(distances, radius);
  r.probs.resize(distances.size());
  const double scale = 1.0 / (static_cast<double>(distances.size()) * cfg.theta);
  double sum = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const double u = r.margins[i];
    const double clipped = std::min(u, cfg.qTrunc);
    r.probs[i] = sigmoid(-clipped);
    if (cfg.discardOutside && distances[i] > radius) continue;
    // -log Sig(-u) = softplus(u)
    sum += softplus(clipped);
    if (u > cfg.qTrunc) {
      ++r.samplesTruncated;
    } else {
      r.gradScales[i] = scale * sigmoid(u);  // 1 - v_i
    }
  }
  r.lossValue = scale * sum;
  return r;
}

BatchLossResult mseOclLoss(std::span<const double> distances) {
  requireNonEmpty(distances, "mseOclLoss");
  BatchLossResult r = withMargins(distances, 0.0);
  const double scale = 1.0 / static_cast<double>(distances.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    sum += distances[i] * distances[i];
    r.gradScales[i] = scale;
  }
  r.lossValue = scale * sum;
  return r;
}

BatchLossResult sblLoss(std::span<const double> distances, double radius, const LossConfig& cfg) {
  requireNonEmpty(distances, "sblLoss");
  if (!(radius >= 0.0)) throw ValidationError("sblLoss: radius must be >= 0");
  BatchLossResult r = withMargins(distances, radius);
  const double scale = cfg.lambda1 / static_cast<double>(distances.size());
  double hinge = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    // ties at u == 0 count as inactive
    if (r.margins[i] > 0.0) {
      hinge += r.margins[i];
      r.gradScales[i] = scale;
    }
  }
  r.lossValue = radius * radius + scale * hinge;
  return r;
}

BatchLossResult hrnLoss(const Matrix& outputs, std::span<const double> jacobianPenalties,
                        const LossConfig& cfg) {
  if (outputs.cols() != 1) {
    throw UnsupportedConfigError("hrnLoss requires scalar outputs, got width " +
                                 std::to_string(outputs.cols()));
  }
  if (outputs.rows() == 0) throw ValidationError("hrnLoss: empty batch");
  if (jacobianPenalties.size() != outputs.rows()) {
    throw DimensionError("hrnLoss: one Jacobian penalty per sample required");
  }
  BatchLossResult r;
  r.outputGrad = Matrix(outputs.rows(), 1);
  r.penaltyScales.assign(outputs.rows(), 0.0);
  const double half = cfg.hrnExponent / 2.0;
  double nll = 0.0;
  double penalty = 0.0;
  for (std::size_t i = 0; i < outputs.rows(); ++i) {
    const double phi = outputs(i, 0);
    nll += softplus(-phi);  // -log Sig(phi)
    r.outputGrad(i, 0) = -sigmoid(-phi);
    const double v = jacobianPenalties[i];
    if (v < 0.0) throw ValidationError("hrnLoss: negative Jacobian penalty");
    penalty += std::pow(v, half);
    if (half == 1.0) {
      r.penaltyScales[i] = cfg.lambda;
    } else if (v > 0.0) {
      r.penaltyScales[i] = cfg.lambda * half * std::pow(v, half - 1.0);
    }
  }
  r.lossValue = nll + cfg.lambda * penalty;
  return r;
}

void attachSphereOutputGrad(BatchLossResult& result, const Matrix& outputs,
                            std::span<const double> center) {
  if (result.gradScales.size() != outputs.rows()) {
    throw DimensionError("attachSphereOutputGrad: batch size mismatch");
  }
  if (center.size() != outputs.cols()) {
    throw DimensionError("attachSphereOutputGrad: center width mismatch");
  }
  result.outputGrad = Matrix(outputs.rows(), outputs.cols());
  for (std::size_t i = 0; i < outputs.rows(); ++i) {
    const double s = result.gradScales[i];
    if (s == 0.0) continue;
    auto src = outputs.row(i);
    auto dst = result.outputGrad.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = 2.0 * s * (src[j] - center[j]);
  }
}

double barrierValue(double u, double theta, double epsLog) noexcept {
  return 0.0 - std::log(std::max(-u, epsLog)) / theta;
}

std::vector<BarrierPoint> barrierCurve(std::span<const double> thetaValues,
                                       std::span<const double> uGrid) {
  for (double t : thetaValues) {
    if (!(t > 0.0)) throw ValidationError("barrierCurve: theta must be > 0");
  }
  for (double u : uGrid) {
    if (!(u < 0.0)) throw ValidationError("barrierCurve: every u must be < 0");
  }
  std::vector<BarrierPoint> out;
  out.reserve(thetaValues.size() * uGrid.size());
  for (double t : thetaValues) {
    for (double u : uGrid) out.push_back({t, u, barrierValue(u, t)});
  }
  return out;
}

std::vector<double> barrierGrid(double uMin, double uMax, std::size_t points) {
  if (!(uMin > 0.0) || !(uMax > uMin) || points < 2) {
    throw ValidationError("barrierGrid: need 0 < uMin < uMax and at least 2 points");
  }
  std::vector<double> grid(points);
  const double step = (uMax - uMin) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = -(uMax - step * static_cast<double>(i));
  }
  grid.back() = -uMin;
  return grid;
}

}  // namespace occ
