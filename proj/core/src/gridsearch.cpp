#include "occ/gridsearch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "occ/error.hpp"
#include "occ/rng.hpp"

namespace occ {

std::string toString(SelectionMode mode) {
  return mode == SelectionMode::TrainingLoss ? "training_loss" : "validation_auc";
}

SelectionMode parseSelectionMode(const std::string& name) {
  if (name == "training_loss") return SelectionMode::TrainingLoss;
  if (name == "validation_auc") return SelectionMode::ValidationAuc;
  throw ValidationError("unknown selection mode '" + name +
                        "' (expected training_loss, validation_auc)");
}

namespace {

template <typename T>
std::vector<T> orBase(const std::vector<T>& values, T base) {
  return values.empty() ? std::vector<T>{base} : values;
}

struct ValidationData {
  OccSplit trainSplit;  // training targets minus the held-out share
  Matrix heldOutTargets;
};

ValidationData holdOut(const OccSplit& split, double fraction, std::uint64_t seed) {
  const std::size_t n = split.trainTargets.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(deriveSeed(seed, 7));
  rng.shuffle(order);
  auto nHeld = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  nHeld = std::clamp<std::size_t>(nHeld, 1, n > 1 ? n - 1 : 1);
  if (n < 2) throw ValidationError("validation hold-out needs at least two training targets");
  std::vector<std::size_t> held(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(nHeld));
  std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(nHeld), order.end());
  std::sort(held.begin(), held.end());
  std::sort(kept.begin(), kept.end());
  ValidationData v;
  v.trainSplit = split;
  v.trainSplit.trainTargets = selectRows(split.trainTargets, kept);
  v.heldOutTargets = selectRows(split.trainTargets, held);
  return v;
}

}  // namespace

std::vector<TrainConfig> expandGrid(const TrainConfig& base, const HyperGrid& grid) {
  std::vector<TrainConfig> out;
  for (double lr : orBase(grid.learningRates, base.learningRate))
    for (double lam : orBase(grid.lambdas, base.loss.lambda))
      for (double l1 : orBase(grid.lambda1s, base.loss.lambda1))
        for (double l2 : orBase(grid.lambda2s, base.loss.lambda2))
          for (std::size_t h : orBase(grid.hiddenDims, base.hiddenDim)) {
            TrainConfig c = base;
            c.learningRate = lr;
            c.loss.lambda = lam;
            c.loss.lambda1 = l1;
            c.loss.lambda2 = l2;
            c.hiddenDim = h;
            out.push_back(std::move(c));
          }
  return out;
}

GridSearchResult gridSearch(const OccSplit& split, const TrainConfig& base, const HyperGrid& grid,
                            const GridSearchOptions& options) {
  GridSearchResult result;
  result.mode = options.mode;
  if (options.mode == SelectionMode::ValidationAuc && options.validationOutliers.rows() == 0) {
    result.mode = SelectionMode::TrainingLoss;
  }

  std::optional<ValidationData> validation;
  if (result.mode == SelectionMode::ValidationAuc) {
    validation = holdOut(split, options.validationFraction, base.seed);
  }

  const auto configs = expandGrid(base, grid);
  result.rows.resize(configs.size());
  std::vector<std::optional<TrainedModel>> models(configs.size());

  auto runOne = [&](std::size_t i) {
    GridRow& row = result.rows[i];
    row.index = i;
    row.config = configs[i];
    try {
      if (validation) {
        TrainedModel m = train(validation->trainSplit, configs[i]);
        std::vector<ScoredSample> samples;
        for (double e : anomalyErrors(m, validation->heldOutTargets))
          samples.push_back({e, SampleLabel::Target});
        for (double e : anomalyErrors(m, options.validationOutliers))
          samples.push_back({e, SampleLabel::Outlier});
        row.metric = auc(samples);
      }
      TrainedModel m = train(split, configs[i]);
      if (!validation) row.metric = m.lossHistory.back();
      if (split.testFeatures.rows() > 0) row.testReport = evaluate(m, split);
      models[i] = std::move(m);
    } catch (const std::exception& e) {
      row.metric.reset();
      row.error = e.what();
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, configs.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) runOne(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) runOne(i);
      });
    }
  }

  for (const auto& row : result.rows) {
    if (!row.metric) continue;
    if (!result.best) {
      result.best = row.index;
      continue;
    }
    const double incumbent = *result.rows[*result.best].metric;
    const bool better = result.mode == SelectionMode::TrainingLoss ? *row.metric < incumbent
                                                                   : *row.metric > incumbent;
    if (better) result.best = row.index;
  }
  if (result.best) result.bestModel = std::move(models[*result.best]);
  return result;
}

}  // namespace occ
