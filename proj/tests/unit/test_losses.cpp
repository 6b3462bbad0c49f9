#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/generators.hpp"
#include "../support/lblsig_checks.hpp"
#include "../support/oracles.hpp"
#include "occ/error.hpp"
#include "occ/losses.hpp"
#include "occ/objective.hpp"

using occ::LossConfig;
using occ::LossKind;
using occ::Matrix;

namespace {

// distances giving the requested margins for radius R
std::vector<double> distancesFor(const std::vector<double>& u, double R) {
  std::vector<double> d;
  for (double v : u) d.push_back(std::sqrt(v + R * R));
  return d;
}

LossConfig withTheta(double theta) {
  LossConfig c;
  c.theta = theta;
  return c;
}

}  // namespace

TEST_CASE("distance") {
  const std::vector<double> zero{0, 0};
  CHECK(occ::distance(Matrix::fromRows({{3, 4}}), zero) == std::vector<double>{5});
  const std::vector<double> c{1, -2};
  CHECK(occ::distance(Matrix::fromRows({{1, -2}}), c) == std::vector<double>{0});
  const auto two = occ::distance(Matrix::fromRows({{3, 4}, {0, 1}}), zero);
  CHECK(two == std::vector<double>{5, 1});
  CHECK_THROWS_AS(occ::distance(Matrix(1, 3), zero), occ::DimensionError);
}

TEST_CASE("LBL: hand-evaluated values") {
  // u = -1 with R = 1 and D = 0
  const auto a = occ::lblLoss(std::vector<double>{0.0}, 1.0, withTheta(1));
  CHECK(a.lossValue == 0.0);
  CHECK(a.margins[0] == -1.0);

  const auto b = occ::lblLoss(distancesFor({-1 / std::numbers::e}, 1.0), 1.0, withTheta(1));
  CHECK(b.lossValue == doctest::Approx(1.0).epsilon(1e-12));

  const auto c = occ::lblLoss(std::vector<double>{0.0, 0.0}, 1.0, withTheta(2));
  CHECK(c.lossValue == 0.0);
  CHECK(c.gradScales == std::vector<double>{0.25, 0.25});

  CHECK_THROWS_AS(occ::lblLoss(std::vector<double>{1.0}, 0.0, withTheta(1)), occ::ValidationError);
  CHECK_THROWS_AS(occ::lblLoss(std::vector<double>{1.0}, -1.0, withTheta(1)), occ::ValidationError);
}

TEST_CASE("LBL: clamp keeps the loss finite at and beyond the boundary") {
  LossConfig cfg;
  const auto r = occ::lblLoss(std::vector<double>{1.0, 2.0}, 1.0, cfg);
  CHECK(std::isfinite(r.lossValue));
  CHECK(r.lossValue == doctest::Approx(-std::log(1e-12)));
  CHECK(r.gradScales[0] == doctest::Approx(0.5 / 1e-12));
}

TEST_CASE("LBL per-sample barrier is steep near the boundary") {
  CHECK(occ::barrierValue(-1e-6, 1.0, 1e-12) > 13.0);
  CHECK(occ::barrierValue(-1e-6, 1.0, 1e-12) == doctest::Approx(-std::log(1e-6)));
  const auto r = occ::lblLoss(distancesFor({-1e-6}, 1.0), 1.0, withTheta(1));
  CHECK(r.lossValue > 13.0);
}

TEST_CASE("LBLSig: hand-evaluated values") {
  LossConfig cfg;
  const auto a = occ::lblsigLoss(distancesFor({0.0}, 1.0), 1.0, cfg);
  CHECK(a.lossValue == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(a.gradScales[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a.probs[0] == doctest::Approx(0.5).epsilon(1e-12));

  const auto b = occ::lblsigLoss(distancesFor({-50.0}, 10.0), 10.0, cfg);
  CHECK(b.lossValue < 1e-20);
  CHECK(b.gradScales[0] < 1e-20);

  const auto at10 = occ::lblsigLoss(distancesFor({10.0}, 1.0), 1.0, cfg);
  const auto at100 = occ::lblsigLoss(distancesFor({100.0}, 1.0), 1.0, cfg);
  CHECK(at10.lossValue == doctest::Approx(10.0000454).epsilon(1e-9));
  CHECK(at10.lossValue == doctest::Approx(std::log1p(std::exp(10.0))).epsilon(1e-14));
  CHECK(at100.lossValue == at10.lossValue);
  CHECK(at100.gradScales[0] == 0.0);
  CHECK(at100.samplesTruncated == 1);
  CHECK(at10.samplesTruncated == 0);
  CHECK(at10.gradScales[0] > 0.0);
}

TEST_CASE("LBLSig: discard flag drops samples outside the sphere") {
  LossConfig cfg;
  cfg.discardOutside = true;
  const std::vector<double> d{0.5, 2.0};
  const auto r = occ::lblsigLoss(d, 1.0, cfg);
  CHECK(r.gradScales[1] == 0.0);
  CHECK(r.gradScales[0] > 0.0);
  CHECK(r.lossValue == doctest::Approx(occ::softplus(0.25 - 1.0) / 2.0));
}

TEST_CASE("MSE-OCL") {
  CHECK(occ::mseOclLoss(std::vector<double>{0, 0, 0}).lossValue == 0.0);
  const auto r = occ::mseOclLoss(std::vector<double>{1, 2});
  CHECK(r.lossValue == 2.5);
  CHECK(r.gradScales == std::vector<double>{0.5, 0.5});
  const double k = 3.0;
  CHECK(occ::mseOclLoss(std::vector<double>{k, 2 * k}).lossValue == doctest::Approx(k * k * 2.5));
}

TEST_CASE("SBL") {
  LossConfig cfg;
  cfg.lambda1 = 1.0;
  const auto a = occ::sblLoss(std::vector<double>{1, 2}, 2.0, cfg);
  CHECK(a.lossValue == 4.0);
  const auto b = occ::sblLoss(std::vector<double>{3}, 2.0, cfg);
  CHECK(b.lossValue == 9.0);
  CHECK(b.gradScales[0] == 1.0);
  const auto tie = occ::sblLoss(std::vector<double>{2, 1}, 2.0, cfg);
  CHECK(tie.lossValue == 4.0);
  CHECK(tie.gradScales[0] == 0.0);
}

TEST_CASE("SBL with R = 0 and lambda1 = 1 reduces to MSE-OCL") {
  LossConfig cfg;
  cfg.lambda1 = 1.0;
  gen::Engine g(4);
  const auto d = gen::reals(g, 17, 0.01, 3.0);
  const auto s = occ::sblLoss(d, 0.0, cfg);
  const auto m = occ::mseOclLoss(d);
  CHECK(s.lossValue == doctest::Approx(m.lossValue).epsilon(1e-15));
  CHECK(s.gradScales == m.gradScales);
}

TEST_CASE("HRN") {
  LossConfig cfg;
  cfg.lambda = 0.0;
  const auto a = occ::hrnLoss(Matrix(1, 1), std::vector<double>{3.0}, cfg);
  CHECK(a.lossValue == doctest::Approx(std::log(2.0)));
  CHECK(a.outputGrad(0, 0) == doctest::Approx(-0.5));

  const auto b = occ::hrnLoss(Matrix(1, 1, 50.0), std::vector<double>{0.0}, cfg);
  CHECK(b.lossValue < 1e-20);

  const Matrix phi = Matrix::fromRows({{0.3}, {-1.2}});
  const std::vector<double> pen{0.5, 2.0};
  const double nll = occ::softplus(-0.3) + occ::softplus(1.2);
  CHECK(occ::hrnLoss(phi, pen, cfg).lossValue == nll);
  cfg.lambda = 0.1;
  cfg.hrnExponent = 2.0;
  CHECK(occ::hrnLoss(phi, pen, cfg).lossValue == doctest::Approx(nll + 0.1 * 2.5));
  cfg.hrnExponent = 4.0;
  CHECK(occ::hrnLoss(phi, pen, cfg).lossValue == doctest::Approx(nll + 0.1 * (0.25 + 4.0)));

  CHECK_THROWS_AS(occ::hrnLoss(Matrix(2, 2), pen, cfg), occ::UnsupportedConfigError);
}

TEST_CASE("barrier curve and grid") {
  const std::vector<double> thetas{1.0, 2.0};
  const std::vector<double> us{-1.0, -0.5};
  const auto pts = occ::barrierCurve(thetas, us);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].value == 0.0);
  CHECK(pts[2].value == 0.0);
  CHECK(pts[1].value == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(pts[1].value == std::log(2.0));

  const std::vector<double> bad{-1.0, 0.0};
  CHECK_THROWS_AS(occ::barrierCurve(thetas, bad), occ::ValidationError);
  const std::vector<double> badTheta{0.0};
  CHECK_THROWS_AS(occ::barrierCurve(badTheta, us), occ::ValidationError);

  const auto grid = occ::barrierGrid(0.5, 1.5, 3);
  CHECK(grid == std::vector<double>{-1.5, -1.0, -0.5});
  CHECK_THROWS_AS(occ::barrierGrid(0.0, 1.0, 10), occ::ValidationError);
  CHECK_THROWS_AS(occ::barrierGrid(1.0, 0.5, 10), occ::ValidationError);
}

TEST_CASE("loss config validation and names") {
  LossConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.theta = 0;
  CHECK_THROWS_AS(cfg.validate(), occ::ValidationError);
  cfg = {};
  cfg.radiusQuantile = 1.5;
  CHECK_THROWS_AS(cfg.validate(), occ::ValidationError);
  cfg = {};
  cfg.epsLog = 0;
  CHECK_THROWS_AS(cfg.validate(), occ::ValidationError);

  for (auto k : {LossKind::MseOcl, LossKind::Sbl, LossKind::Hrn, LossKind::Lbl, LossKind::LblSig}) {
    CHECK(occ::parseLossKind(occ::toString(k)) == k);
  }
  CHECK(occ::parseLossKind("lblsig") == LossKind::LblSig);
  CHECK_THROWS_AS(occ::parseLossKind("svdd"), occ::ValidationError);

  cfg = {};
  cfg.kind = LossKind::Sbl;
  cfg.lambda2 = 0.3;
  CHECK(cfg.weightDecay() == 0.3);
  cfg.kind = LossKind::Lbl;
  CHECK(cfg.weightDecay() == cfg.lambda);
}

TEST_CASE("property: LBL is strictly increasing in u") {
  FOR_SEEDS(seed, 50) {
    gen::Engine g(seed);
    const double theta = gen::real(g, 0.1, 5.0);
    double u1 = -gen::real(g, 1e-9, 50.0), u2 = -gen::real(g, 1e-9, 50.0);
    if (u1 == u2) continue;
    if (u1 > u2) std::swap(u1, u2);
    CAPTURE(seed);
    CHECK(occ::barrierValue(u1, theta, 1e-12) < occ::barrierValue(u2, theta, 1e-12));
  }
}

TEST_CASE("property: margin samples get larger gradient scales") {
  FOR_SEEDS(seed, 50) {
    CAPTURE(seed);
    gen::Engine g(seed);
    const double R = gen::real(g, 0.5, 3.0);
    std::vector<double> d = gen::reals(g, gen::size(g, 2, 30), 0.0, R * 0.999);
    const auto lbl = occ::lblLoss(d, R, LossConfig{});
    auto sig = occ::lblsigLoss(d, R, LossConfig{});
    for (std::size_t a = 0; a < d.size(); ++a) {
      for (std::size_t b = 0; b < d.size(); ++b) {
        if (lbl.margins[a] <= lbl.margins[b]) continue;
        CHECK(lbl.gradScales[a] >= lbl.gradScales[b]);
        CHECK(sig.gradScales[a] >= sig.gradScales[b]);
      }
    }
    // LBLSig also over positive margins up to Q
    std::vector<double> wide = gen::reals(g, 20, 0.0, std::sqrt(R * R + 9.9));
    sig = occ::lblsigLoss(wide, R, LossConfig{});
    for (std::size_t a = 0; a < wide.size(); ++a)
      for (std::size_t b = 0; b < wide.size(); ++b)
        if (sig.margins[a] > sig.margins[b]) CHECK(sig.gradScales[a] >= sig.gradScales[b]);
  }
}

TEST_CASE("property: LBLSig probabilities lie in (0, 1] and losses stay finite") {
  FOR_SEEDS(seed, 50) {
    CAPTURE(seed);
    gen::Engine g(seed);
    const auto d = gen::reals(g, 25, 0.0, 100.0);
    const double R = gen::real(g, 0.0, 50.0);
    const auto r = occ::lblsigLoss(d, R, LossConfig{});
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(r.probs[i] > 0.0);
      CHECK(r.probs[i] <= 1.0);
      if (std::fabs(r.margins[i]) < 30.0) CHECK(r.probs[i] < 1.0);
    }
    CHECK(std::isfinite(r.lossValue));
    CHECK(std::isfinite(occ::lblLoss(d, R + 1e-3, LossConfig{}).lossValue));
  }
}

TEST_CASE("property: with lambda = 0 the objective ignores weight magnitude given fixed outputs") {
  // Scaling the last layer by k and its input by 1/k keeps outputs; ReLU is
  // positively homogeneous so the hidden pre-activations scale consistently.
  FOR_SEEDS(seed, 10) {
    CAPTURE(seed);
    gen::Engine g(seed);
    occ::ModelParams p =
        occ::makeTwoHiddenLayerMlp(3, 5, 2, occ::Activation{occ::ActivationKind::ReLU, 0}, seed);
    const Matrix x = oracle::randomMatrix(g, 6, 3);
    occ::ModelParams q = p;
    const double k = gen::real(g, 2.0, 5.0);
    for (double& w : q.layers[1].weight.values()) w *= k;
    for (double& b : q.layers[1].bias) b *= k;
    for (double& w : q.layers[2].weight.values()) w /= k;
    const std::vector<double> c{0.1, -0.1};
    for (auto kind : {LossKind::MseOcl, LossKind::Sbl, LossKind::Lbl, LossKind::LblSig}) {
      LossConfig cfg;
      cfg.kind = kind;
      cfg.lambda = cfg.lambda2 = 0.0;
      const double a = occ::objectiveValue(p, x, c, 5.0, cfg);
      const double b = occ::objectiveValue(q, x, c, 5.0, cfg);
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
      cfg.lambda = cfg.lambda2 = 0.5;
      CHECK(occ::objectiveValue(p, x, c, 5.0, cfg) != doctest::Approx(occ::objectiveValue(q, x, c, 5.0, cfg)));
    }
  }
}

TEST_CASE("property: LBLSig gradient equals the weighted sum of per-sample distance gradients") {
  FOR_SEEDS(seed, 10) {
    CAPTURE(seed);
    CHECK(oracle::lblsigIdentityGap(oracle::randomLblSigBatch(seed)) <= 1e-10);
  }
}

TEST_CASE("property: a truncated sample leaves the gradient bit-identical when moved") {
  FOR_SEEDS(seed, 10) {
    CAPTURE(seed);
    const auto probe = oracle::truncationProbe(seed);
    REQUIRE(probe.truncatedBefore);
    REQUIRE(probe.truncatedAfter);
    CHECK(probe.bitIdentical);
  }
}
