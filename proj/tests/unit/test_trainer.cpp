#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "occ/data.hpp"
#include "occ/error.hpp"
#include "occ/trainer.hpp"

using occ::LossKind;
using occ::Matrix;
using occ::TrainConfig;

namespace {

occ::OccSplit ringSplit(std::uint64_t seed, std::size_t n = 200) {
  const auto ds = occ::synthGaussianRing(seed, n, n, 2, 5.0);
  return occ::normalize(occ::makeOccSplit(ds, 0, occ::FractionSplit{0.5, seed}));
}

TrainConfig smallConfig(LossKind kind) {
  TrainConfig c;
  c.loss.kind = kind;
  c.epochs = 20;
  c.batchSize = 50;
  c.learningRate = 1e-3;
  c.hiddenDim = 16;
  c.outputDim = 4;
  c.activation = occ::Activation{occ::ActivationKind::Tanh, 0};
  return c;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.epochs = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("epochs"), occ::ValidationError);
  c = {};
  c.batchSize = 0;
  CHECK_THROWS_AS(c.validate(), occ::ValidationError);
  c = {};
  c.rejectFraction = 1.0;
  CHECK_THROWS_AS(c.validate(), occ::ValidationError);
  c = {};
  c.epochs = 0;
  CHECK_THROWS_AS(occ::train(ringSplit(1, 20), c), occ::ValidationError);
}

TEST_CASE("training refuses an unnormalized split") {
  const auto ds = occ::synthGaussianRing(1, 20, 20, 2, 5.0);
  const auto raw = occ::makeOccSplit(ds, 0, occ::FractionSplit{0.5, 1});
  CHECK_THROWS_AS(occ::train(raw, smallConfig(LossKind::Lbl)), occ::ValidationError);
}

TEST_CASE("one optimizer step per epoch when the batch covers the data") {
  auto cfg = smallConfig(LossKind::LblSig);
  cfg.epochs = 3;
  cfg.batchSize = 1000;
  std::size_t calls = 0;
  const auto m = occ::train(ringSplit(2, 40), cfg, [&](const occ::BatchTrace& t) {
    CHECK(t.batch == 0);
    CHECK(t.epoch == calls);
    ++calls;
  });
  CHECK(calls == 3);
  CHECK(m.lossHistory.size() == 3);
}

TEST_CASE("single-sample MSE-OCL training pulls the sample toward the center") {
  occ::Dataset ds;
  ds.features = Matrix::fromRows({{0.3, -0.7}, {1.0, 1.0}});
  ds.labels = {0, 1};
  auto split = occ::makeOccSplit(ds, 0, occ::FractionSplit{1.0, 1});
  split = occ::normalize(split);
  auto cfg = smallConfig(LossKind::MseOcl);
  cfg.centerPolicy = occ::CenterPolicy::FixedVector;
  cfg.fixedCenter = {1.0, 1.0, 1.0, 1.0};
  cfg.loss.lambda = 0.0;
  cfg.epochs = 1;
  const double before = occ::anomalyErrors(occ::train(split, cfg), split.trainTargets)[0];
  cfg.epochs = 50;
  const auto m = occ::train(split, cfg);
  const double after = occ::anomalyErrors(m, split.trainTargets)[0];
  CHECK(after < before);
  CHECK(m.lossHistory.back() < m.lossHistory.front());
}

TEST_CASE("identical seeds give identical runs") {
  const auto split = ringSplit(3);
  const auto cfg = smallConfig(LossKind::Lbl);
  const auto a = occ::train(split, cfg);
  const auto b = occ::train(split, cfg);
  CHECK(a.lossHistory == b.lossHistory);
  CHECK(a.params == b.params);
  CHECK(a.sphere.threshold == b.sphere.threshold);
  auto other = cfg;
  other.seed = 43;
  CHECK_FALSE(occ::train(split, other).params == a.params);
}

TEST_CASE("predictions") {
  const auto split = ringSplit(4, 60);
  auto m = occ::train(split, smallConfig(LossKind::LblSig));

  // an input mapped exactly onto the center
  const Matrix one = Matrix::fromRows({{0.1, 0.2}});
  const Matrix y = occ::evaluate(m.params, one);
  m.sphere.center.assign(y.values().begin(), y.values().end());
  const auto p = occ::predict(m, one);
  CHECK(p[0].error == 0.0);
  CHECK(p[0].decision == occ::Decision::Target);

  const Matrix other = Matrix::fromRows({{-0.5, 0.9}});
  m.sphere.threshold = occ::anomalyErrors(m, other)[0];
  CHECK(occ::predict(m, other)[0].decision == occ::Decision::Target);
  m.sphere.threshold = std::nextafter(m.sphere.threshold, 0.0);
  CHECK(occ::predict(m, other)[0].decision == occ::Decision::Other);

  const auto all = occ::predict(m, split.testFeatures);
  for (std::size_t i = 0; i < split.testFeatures.rows(); i += 7) {
    const auto single = occ::predict(m, occ::selectRows(split.testFeatures, std::vector<std::size_t>{i}));
    CHECK(single[0].error == all[i].error);
    CHECK(single[0].decision == all[i].decision);
  }
}

TEST_CASE("training separates the ring from its center") {
  const auto split = ringSplit(5);
  auto cfg = smallConfig(LossKind::LblSig);
  cfg.epochs = 60;
  const auto r = occ::evaluate(occ::train(split, cfg), split);
  REQUIRE(r.auc.has_value());
  CHECK(*r.auc > 0.5);
  CHECK(r.nTargets + r.nOutliers == split.testFeatures.rows());
}

TEST_CASE("an untrained model is at chance on exchangeable classes") {
  gen::Engine g(6);
  occ::Dataset ds;
  ds.features = oracle::randomMatrix(g, 800, 3, -1, 1);
  for (std::size_t i = 0; i < 800; ++i) ds.labels.push_back(static_cast<occ::ClassId>(i % 2));
  const auto split = occ::normalize(occ::makeOccSplit(ds, 0, occ::FractionSplit{0.5, 6}));
  auto cfg = smallConfig(LossKind::Lbl);
  cfg.epochs = 1;
  cfg.learningRate = 1e-12;
  const auto r = occ::evaluate(occ::train(split, cfg), split);
  REQUIRE(r.auc.has_value());
  CHECK(std::fabs(*r.auc - 0.5) <= 0.15);
}

TEST_CASE("a target-only test set yields no AUC") {
  occ::Dataset ds;
  ds.features = Matrix::fromRows({{0, 1}, {1, 0}, {0.5, 0.5}, {0.2, 0.1}});
  ds.labels = {0, 0, 0, 0};
  const auto split = occ::normalize(occ::makeOccSplit(ds, 0, occ::FractionSplit{0.5, 1}));
  const auto r = occ::evaluate(occ::train(split, smallConfig(LossKind::Sbl)), split);
  CHECK_FALSE(r.auc.has_value());
  CHECK_FALSE(r.gmean.has_value());
  CHECK(r.nTargets == 2);
}

TEST_CASE("divergence raises a training error naming the epoch") {
  auto cfg = smallConfig(LossKind::Lbl);
  cfg.learningRate = 1e300;
  cfg.epochs = 5;
  CHECK_THROWS_WITH_AS(occ::train(ringSplit(7, 40), cfg), doctest::Contains("at epoch"), occ::TrainingError);
}

TEST_CASE("the radius is recomputed from the batch before each step") {
  for (auto kind : {LossKind::Lbl, LossKind::LblSig, LossKind::Sbl}) {
    CAPTURE(occ::toString(kind));
    auto cfg = smallConfig(kind);
    cfg.epochs = 3;
    cfg.batchSize = 20;
    std::size_t n = 0;
    occ::train(ringSplit(8, 80), cfg, [&](const occ::BatchTrace& t) {
      ++n;
      CHECK(t.radiusUpdated);
      CHECK(t.radius == occ::scheduleRadius(t.distances, cfg.loss));
      if (kind == LossKind::Lbl) {
        CHECK(t.radius == 2.0 * *std::max_element(t.distances.begin(), t.distances.end()));
      }
    });
    CHECK(n == 3 * 2);
  }
}

TEST_CASE("radius update period holds the radius between updates") {
  auto cfg = smallConfig(LossKind::Lbl);
  cfg.epochs = 4;
  cfg.batchSize = 20;
  cfg.loss.radiusUpdatePeriod = 3;
  std::size_t step = 0;
  double held = -1;
  occ::train(ringSplit(9, 80), cfg, [&](const occ::BatchTrace& t) {
    CHECK(t.radiusUpdated == (step % 3 == 0));
    if (t.radiusUpdated) held = t.radius;
    CHECK(t.radius == held);
    ++step;
  });
  CHECK(step == 8);
}

TEST_CASE("LBL training contracts the target outputs") {
  auto cfg = smallConfig(LossKind::Lbl);
  cfg.epochs = 40;
  std::vector<double> firstEpoch, lastEpoch;
  occ::train(ringSplit(10), cfg, [&](const occ::BatchTrace& t) {
    if (t.epoch == 0) firstEpoch.push_back(mean(t.distances));
    if (t.epoch + 1 == cfg.epochs) lastEpoch.push_back(mean(t.distances));
  });
  CHECK(mean(lastEpoch) < mean(firstEpoch));
}

TEST_CASE("property: barrier losses stay finite across seeds") {
  FOR_SEEDS(seed, 100) {
    CAPTURE(seed);
    const auto split = ringSplit(seed, 40);
    auto cfg = smallConfig(seed % 2 ? LossKind::Lbl : LossKind::LblSig);
    cfg.epochs = 5;
    cfg.batchSize = 16;
    cfg.seed = seed;
    cfg.activation = occ::Activation{};
    const auto m = occ::train(split, cfg);
    for (double l : m.lossHistory) CHECK(std::isfinite(l));
    CHECK(std::isfinite(m.sphere.threshold));
  }
}

TEST_CASE("HRN trains a scalar head and scores by softplus(-phi)") {
  auto cfg = smallConfig(LossKind::Hrn);
  cfg.epochs = 5;
  const auto split = ringSplit(11, 40);
  const auto m = occ::train(split, cfg);
  CHECK(m.params.outputDim() == 1);
  CHECK(m.sphere.center.empty());
  const auto phi = occ::evaluate(m.params, split.testFeatures);
  const auto err = occ::anomalyErrors(m, split.testFeatures);
  for (std::size_t i = 0; i < err.size(); ++i) CHECK(err[i] == occ::softplus(-phi(i, 0)));
}
