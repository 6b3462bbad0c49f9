#include "occ/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "occ/error.hpp"
#include "occ/hypersphere.hpp"

namespace occ {

std::string toString(SampleLabel label) {
  return label == SampleLabel::Target ? "target" : "outlier";
}

namespace {

void checkErrors(std::span<const ScoredSample> samples) {
  for (const auto& s : samples) {
    if (!std::isfinite(s.error)) throw ValidationError("scored sample has a non-finite error");
  }
}

std::vector<std::size_t> orderByError(std::span<const ScoredSample> samples) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].error < samples[b].error;
  });
  return order;
}

}  // namespace

double auc(std::span<const ScoredSample> samples) {
  checkErrors(samples);
  std::size_t nOut = 0;
  for (const auto& s : samples) nOut += s.label == SampleLabel::Outlier ? 1 : 0;
  const std::size_t nTgt = samples.size() - nOut;
  if (nOut == 0 || nTgt == 0) {
    throw ValidationError("auc needs at least one target and one outlier");
  }

  const auto order = orderByError(samples);
  // Sum of outlier midranks, kept in half-units so it stays an exact integer.
  std::size_t halfRankSum = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && samples[order[j]].error == samples[order[i]].error) ++j;
    // ranks i+1 .. j share the midrank (i+1+j)/2
    const std::size_t twiceMidrank = i + 1 + j;
    for (std::size_t k = i; k < j; ++k) {
      if (samples[order[k]].label == SampleLabel::Outlier) halfRankSum += twiceMidrank;
    }
    i = j;
  }
  // U = rankSum - nOut (nOut + 1) / 2, counted in half units
  const std::size_t twiceU = halfRankSum - nOut * (nOut + 1);
  const double u = static_cast<double>(twiceU) / 2.0;
  return u / (static_cast<double>(nOut) * static_cast<double>(nTgt));
}

ConfusionCounts confusion(std::span<const ScoredSample> samples, double eta) {
  ConfusionCounts c;
  for (const auto& s : samples) {
    const bool accepted = decide(s.error, eta) == Decision::Target;
    if (s.label == SampleLabel::Target) {
      (accepted ? c.truePositives : c.falseNegatives)++;
    } else {
      (accepted ? c.falsePositives : c.trueNegatives)++;
    }
  }
  return c;
}

double gmean(const ConfusionCounts& counts) {
  if (counts.nTargets() == 0 || counts.nOutliers() == 0) {
    throw ValidationError("gmean needs at least one target and one outlier");
  }
  const double tpr =
      static_cast<double>(counts.truePositives) / static_cast<double>(counts.nTargets());
  const double tnr =
      static_cast<double>(counts.trueNegatives) / static_cast<double>(counts.nOutliers());
  return std::sqrt(tpr * tnr);
}

EvaluationReport makeReport(std::span<const ScoredSample> samples, double eta) {
  checkErrors(samples);
  EvaluationReport report;
  report.threshold = eta;
  report.counts = confusion(samples, eta);
  report.nTargets = report.counts.nTargets();
  report.nOutliers = report.counts.nOutliers();
  if (report.nTargets > 0 && report.nOutliers > 0) {
    report.auc = auc(samples);
    report.gmean = gmean(report.counts);
  }
  return report;
}

std::vector<RocPoint> rocCurve(std::span<const ScoredSample> samples) {
  checkErrors(samples);
  std::size_t nOut = 0;
  for (const auto& s : samples) nOut += s.label == SampleLabel::Outlier ? 1 : 0;
  const std::size_t nTgt = samples.size() - nOut;
  if (nOut == 0 || nTgt == 0) {
    throw ValidationError("rocCurve needs at least one target and one outlier");
  }
  auto order = orderByError(samples);
  std::reverse(order.begin(), order.end());

  std::vector<RocPoint> points{{0.0, 0.0}};
  std::size_t flaggedOut = 0;
  std::size_t flaggedTgt = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && samples[order[j]].error == samples[order[i]].error) {
      (samples[order[j]].label == SampleLabel::Outlier ? flaggedOut : flaggedTgt)++;
      ++j;
    }
    points.push_back({static_cast<double>(flaggedTgt) / static_cast<double>(nTgt),
                      static_cast<double>(flaggedOut) / static_cast<double>(nOut)});
    i = j;
  }
  return points;
}

double trapezoidArea(std::span<const RocPoint> points) noexcept {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

}  // namespace occ
