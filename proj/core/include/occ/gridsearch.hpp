#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "occ/trainer.hpp"

namespace occ {

/// Candidate values per hyperparameter. An empty list means "keep the base
/// config's value".
struct HyperGrid {
  std::vector<double> learningRates;
  std::vector<double> lambdas;
  std::vector<double> lambda1s;
  std::vector<double> lambda2s;
  std::vector<std::size_t> hiddenDims;
};

enum class SelectionMode { TrainingLoss, ValidationAuc };

std::string toString(SelectionMode mode);
SelectionMode parseSelectionMode(const std::string& name);

struct GridSearchOptions {
  SelectionMode mode = SelectionMode::TrainingLoss;
  /// Normalized outlier rows for ValidationAuc; empty forces TrainingLoss.
  Matrix validationOutliers;
  /// Share of training targets held out for ValidationAuc.
  double validationFraction = 0.2;
  std::size_t jobs = 1;
};

struct GridRow {
  std::size_t index = 0;
  TrainConfig config;
  std::optional<double> metric;  // final training loss or validation AUC
  std::optional<EvaluationReport> testReport;
  std::string error;             // non-empty when the run failed
};

struct GridSearchResult {
  SelectionMode mode = SelectionMode::TrainingLoss;
  std::vector<GridRow> rows;
  std::optional<std::size_t> best;
  std::optional<TrainedModel> bestModel;
};

/// Expands the grid over `base` in a fixed order: learning rate, lambda,
/// lambda1, lambda2, hidden width (last varies fastest).
std::vector<TrainConfig> expandGrid(const TrainConfig& base, const HyperGrid& grid);

/// One training run per grid point. Failed runs are recorded, not rethrown.
GridSearchResult gridSearch(const OccSplit& split, const TrainConfig& base, const HyperGrid& grid,
                            const GridSearchOptions& options = {});

}  // namespace occ
