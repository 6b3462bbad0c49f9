#include "occ/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "occ/error.hpp"
#include "occ/hypersphere.hpp"
#include "occ/objective.hpp"
#include "occ/rng.hpp"
#include "occ/trainer.hpp"

namespace occ {

namespace {

struct EntryRef {
  ParamLocation loc;
  double* value;
  double analytic;
};

std::vector<EntryRef> enumerate(ModelParams& params, const LayerStack& analytic) {
  std::vector<EntryRef> out;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& w = params.layers[l].weight;
    for (std::size_t r = 0; r < w.rows(); ++r)
      for (std::size_t c = 0; c < w.cols(); ++c)
        out.push_back({{l, r, c, false}, &w(r, c), analytic[l].weight(r, c)});
    for (std::size_t c = 0; c < params.layers[l].bias.size(); ++c)
      out.push_back({{l, 0, c, true}, &params.layers[l].bias[c], analytic[l].bias[c]});
  }
  return out;
}

std::string describe(const ParamLocation& loc) {
  return std::string(loc.isBias ? "bias" : "weight") + "[" + std::to_string(loc.layer) + "](" +
         std::to_string(loc.row) + "," + std::to_string(loc.col) + ")";
}

}  // namespace

GradCheckReport compareGradients(const std::function<double(const ModelParams&)>& objective,
                                 const ModelParams& params, const LayerStack& analytic,
                                 double step, double tolerance) {
  if (!sameShape(params.layers, analytic)) {
    throw DimensionError("compareGradients: analytic gradient shape mismatch");
  }
  GradCheckReport report;
  report.step = step;
  report.tolerance = tolerance;

  ModelParams probe = params;
  bool fallbackFailed = false;
  double worstScore = -1.0;
  for (const EntryRef& e : enumerate(probe, analytic)) {
    const double original = *e.value;
    *e.value = original + step;
    const double up = objective(probe);
    *e.value = original - step;
    const double down = objective(probe);
    *e.value = original;
    ++report.parametersChecked;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      report.failure = "objective not finite when perturbing " + describe(e.loc);
      report.worst = e.loc;
      report.passed = false;
      return report;
    }
    const double numeric = (up - down) / (2.0 * step);
    const double absErr = std::fabs(e.analytic - numeric);
    const double magnitude = std::max(std::fabs(e.analytic), std::fabs(numeric));
    report.maxAbsError = std::max(report.maxAbsError, absErr);
    double score;
    if (magnitude >= report.nearZero) {
      const double rel = absErr / std::max(magnitude, 1e-8);
      report.maxRelError = std::max(report.maxRelError, rel);
      score = rel / tolerance;
    } else {
      if (absErr > report.absTolerance) fallbackFailed = true;
      score = absErr / report.absTolerance;
    }
    if (score > worstScore) {
      worstScore = score;
      report.worst = e.loc;
    }
  }
  report.passed = report.maxRelError <= tolerance && !fallbackFailed;
  if (!report.passed) {
    report.failure = "gradient mismatch, worst entry " + describe(report.worst);
  }
  return report;
}

GradCheckReport checkLossGradient(LossKind kind, std::span<const std::size_t> dims,
                                  std::uint64_t seed, const GradCheckOptions& options) {
  std::vector<std::size_t> shape(dims.begin(), dims.end());
  if (kind == LossKind::Hrn && !shape.empty()) shape.back() = 1;
  if (options.batchSize == 0) throw ValidationError("gradcheck: batch size must be >= 1");

  LossConfig cfg = options.loss;
  cfg.kind = kind;
  cfg.validate();

  Rng rng(deriveSeed(seed, 11));
  ModelParams params = makeMlp(shape, options.activation, rng.next());
  for (auto& layer : params.layers)
    for (double& b : layer.bias) b = rng.uniform(-0.1, 0.1);

  Matrix inputs(options.batchSize, shape.front());
  for (double& v : inputs.values()) v = rng.uniform(-1.0, 1.0);

  std::vector<double> center;
  double radius = 0.0;
  std::size_t truncated = 0;
  if (kind != LossKind::Hrn) {
    center = initCenter(CenterPolicy::MeanOfInitialOutputs, params, inputs);
    // Nudge the center so no output sits on it exactly.
    for (double& c : center) c += rng.uniform(-0.05, 0.05);
    auto d = distance(evaluate(params, inputs), center);
    radius = scheduleRadius(d, cfg);
    if (kind == LossKind::Sbl) {
      // Place R^2 midway between two squared distances so no hinge sits on its kink.
      std::vector<double> sq(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) sq[i] = d[i] * d[i];
      std::sort(sq.begin(), sq.end());
      const auto k = static_cast<std::size_t>((1.0 - cfg.nu) * static_cast<double>(sq.size() - 1));
      const double r2 = k + 1 < sq.size() ? 0.5 * (sq[k] + sq[k + 1]) : sq[k] + 1.0;
      radius = std::sqrt(r2);
    }
    if (kind == LossKind::LblSig && options.forceTruncatedSample) {
      auto row = inputs.row(0);
      for (int iter = 0; iter < 200; ++iter) {
        const double u0 = d[0] * d[0] - radius * radius;
        if (u0 > cfg.qTrunc + 1.0) break;
        for (double& v : row) v = v * 1.5 + (v >= 0.0 ? 0.5 : -0.5);
        d = distance(evaluate(params, inputs), center);
      }
    }
  }

  const ObjectiveTerms terms{!options.regularizerOnly, true};
  const ObjectiveResult analytic = evaluateObjective(params, inputs, center, radius, cfg, terms);
  if (kind != LossKind::Hrn) truncated = analytic.batch.samplesTruncated;

  const double tol = options.tolerance.value_or(kind == LossKind::Hrn ? 1e-4 : 1e-5);
  auto objective = [&](const ModelParams& p) {
    return objectiveValue(p, inputs, center, radius, cfg, terms);
  };
  GradCheckReport report = compareGradients(objective, params, analytic.gradients, options.step, tol);
  report.kind = kind;
  report.seed = seed;
  report.dims = shape;
  report.samplesTruncated = truncated;
  report.lossValue = analytic.total;
  if (options.forceTruncatedSample && kind == LossKind::LblSig && truncated == 0) {
    report.passed = false;
    report.failure = "could not push a sample beyond the truncation point";
  }
  return report;
}

}  // namespace occ
