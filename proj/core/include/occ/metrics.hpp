#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace occ {

enum class SampleLabel { Target, Outlier };

std::string toString(SampleLabel label);

/// Anomaly score of one test sample: larger error means less target-like.
struct ScoredSample {
  double error = 0.0;
  SampleLabel label = SampleLabel::Target;
};

/// Target is the positive class: TP = target accepted, TN = outlier rejected.
struct ConfusionCounts {
  std::size_t truePositives = 0;
  std::size_t falsePositives = 0;
  std::size_t trueNegatives = 0;
  std::size_t falseNegatives = 0;

  std::size_t nTargets() const noexcept { return truePositives + falseNegatives; }
  std::size_t nOutliers() const noexcept { return trueNegatives + falsePositives; }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct EvaluationReport {
  std::optional<double> auc;    // absent when the test set holds one class
  std::optional<double> gmean;  // absent when either class is empty
  ConfusionCounts counts;
  double threshold = 0.0;
  std::size_t nTargets = 0;
  std::size_t nOutliers = 0;
};

/// P(outlier error > target error) + 0.5 P(tie), via midranks.
double auc(std::span<const ScoredSample> samples);

ConfusionCounts confusion(std::span<const ScoredSample> samples, double eta);

/// sqrt(TPR * TNR).
double gmean(const ConfusionCounts& counts);

EvaluationReport makeReport(std::span<const ScoredSample> samples, double eta);

struct RocPoint {
  double fpr;  // fraction of targets flagged as outliers
  double tpr;  // fraction of outliers flagged
};

/// Outlier-detection ROC swept over every distinct error, from (0,0) to (1,1).
std::vector<RocPoint> rocCurve(std::span<const ScoredSample> samples);

double trapezoidArea(std::span<const RocPoint> points) noexcept;

}  // namespace occ
