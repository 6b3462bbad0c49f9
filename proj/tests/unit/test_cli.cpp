#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "../support/oracles.hpp"
#include "cli/app.hpp"
#include "cli/config.hpp"
#include "cli/model_io.hpp"
#include "occ/metrics.hpp"

namespace cli = occ::cli;
namespace fs = std::filesystem;

namespace {

const char* kSmallRun = R"(# small synthetic run
[data]
synthetic = true
synth_targets = 60
synth_outliers = 60
synth_seed = 5

[loss]
kind = LBLSIG   ; trailing comment

[train]
epochs = 5
batch_size = 16
learning_rate = 0.001
hidden_dim = 8
output_dim = 4
activation = tanh
)";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::runCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::size_t dataLines(const fs::path& csv) {
  std::size_t n = 0;
  for (const auto& l : lines(oracle::slurp(csv)))
    if (!l.empty() && l[0] != '#') ++n;
  return n - 1;  // header
}

}  // namespace

TEST_CASE("key-value config parsing") {
  const auto cfg = cli::parseKeyValueConfig(kSmallRun);
  CHECK(cfg.data.synthetic);
  CHECK(cfg.data.synthTargets == 60);
  CHECK(cfg.train.loss.kind == occ::LossKind::LblSig);
  CHECK(cfg.train.epochs == 5);
  CHECK(cfg.train.activation.kind == occ::ActivationKind::Tanh);
  CHECK(cfg.train.learningRate == 0.001);

  CHECK_THROWS_WITH_AS(cli::parseKeyValueConfig("[train]\nepoch = 3\n"),
                       doctest::Contains("train.epoch"), cli::ConfigError);
  CHECK_THROWS_WITH_AS(cli::parseKeyValueConfig("[data]\nsynthetic = true\n[train]\nbatch_size = abc\n"),
                       doctest::Contains("train.batch_size"), cli::ConfigError);
  CHECK_THROWS_WITH_AS(cli::parseKeyValueConfig("[data]\nsynthetic = true\n[train]\nepochs = 0\n"),
                       doctest::Contains("train.epochs"), occ::Error);
  CHECK_THROWS_WITH_AS(cli::parseKeyValueConfig("[loss]\nkind = LBL\n"), doctest::Contains("data.path"),
                       occ::Error);
}

TEST_CASE("JSON config parsing and the resolved-config round trip") {
  const auto doc = nlohmann::json::parse(R"({
    "data": {"synthetic": true},
    "loss": {"kind": "SBL", "nu": 0.2},
    "grid": {"learning_rate": [0.1, 0.01], "selection": "validation_auc"}
  })");
  const auto cfg = cli::parseJsonConfig(doc);
  CHECK(cfg.train.loss.kind == occ::LossKind::Sbl);
  CHECK(cfg.train.loss.nu == 0.2);
  CHECK(cfg.grid.learningRates == std::vector<double>{0.1, 0.01});
  CHECK(cfg.selection == occ::SelectionMode::ValidationAuc);

  const auto again = cli::parseJsonConfig(nlohmann::json::parse(cli::toJson(cfg).dump()));
  CHECK(again.train.loss == cfg.train.loss);
  CHECK(again.grid.learningRates == cfg.grid.learningRates);
  CHECK(cli::toJson(again) == cli::toJson(cfg));
}

TEST_CASE("dumpJson writes 17 significant digits") {
  nlohmann::ordered_json j;
  j["x"] = 0.1;
  j["n"] = 3;
  const auto text = cli::dumpJson(j);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(nlohmann::json::parse(text)["x"].get<double>() == 0.1);
  CHECK(cli::formatNumber(1.0 / 3.0) == "0.33333333333333331");
}

TEST_CASE("train writes artifacts and reruns byte-identically") {
  oracle::TempDir dir("cli");
  const auto cfgPath = dir.write("run.ini", kSmallRun);
  const auto a = run({"train", "--config", cfgPath.string(), "--out", (dir / "a").string()});
  REQUIRE(a.code == 0);
  CHECK(a.out.rfind("train LBLSIG auc=", 0) == 0);
  for (const char* f : {"model.txt", "loss_trace.csv", "scores.csv", "report.json"})
    CHECK(fs::exists(dir / "a" / f));

  const auto report = nlohmann::json::parse(oracle::slurp(dir / "a" / "report.json"));
  const auto& ev = report["evaluation"];
  CHECK(ev["true_positives"].get<int>() + ev["false_negatives"].get<int>() == ev["n_targets"].get<int>());
  CHECK(ev["true_negatives"].get<int>() + ev["false_positives"].get<int>() == ev["n_outliers"].get<int>());
  CHECK(dataLines(dir / "a" / "scores.csv") == ev["n_targets"].get<std::size_t>() + ev["n_outliers"].get<std::size_t>());
  CHECK(dataLines(dir / "a" / "loss_trace.csv") == 5);
  CHECK(report["training"]["loss_history"].size() == 5);

  const auto b = run({"train", "--config", cfgPath.string(), "--out", (dir / "b").string()});
  REQUIRE(b.code == 0);
  CHECK(oracle::slurp(dir / "a" / "report.json") == oracle::slurp(dir / "b" / "report.json"));
  CHECK(oracle::slurp(dir / "a" / "scores.csv") == oracle::slurp(dir / "b" / "scores.csv"));

  // eval on the saved model reproduces the evaluation block
  const auto e = run({"eval", "--config", cfgPath.string(), "--model", (dir / "a" / "model.txt").string(),
                      "--out", (dir / "e").string()});
  REQUIRE(e.code == 0);
  const auto er = nlohmann::json::parse(oracle::slurp(dir / "e" / "eval_report.json"));
  CHECK(er["evaluation"] == ev);

  // a different seed changes the result
  const auto c = run({"train", "--config", cfgPath.string(), "--seed", "7", "--out", (dir / "c").string()});
  REQUIRE(c.code == 0);
  CHECK(oracle::slurp(dir / "a" / "report.json") != oracle::slurp(dir / "c" / "report.json"));
}

TEST_CASE("user errors exit with code 2 and one error line") {
  oracle::TempDir dir("cli");
  const auto cfg = dir.write("missing.ini", "[data]\npath = /nonexistent/data.csv\n");
  const auto r = run({"train", "--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("/nonexistent/data.csv") != std::string::npos);
  CHECK(r.err.rfind("error: kind=", 0) == 0);
  CHECK(lines(r.err).size() == 1);

  CHECK(run({"train", "--config", (dir / "nope.ini").string()}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"train", "--config", cfg.string(), "--set", "train.bogus=1"}).code == 2);
  CHECK(run({"plotdata", "pie"}).code == 2);
}

TEST_CASE("divergent training exits with code 1") {
  oracle::TempDir dir("cli");
  const auto cfg = dir.write("run.ini", kSmallRun);
  const auto r = run({"train", "--config", cfg.string(), "--set", "train.learning_rate=1e300", "--set",
                      "loss.kind=LBL", "--out", (dir / "o").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("kind=training") != std::string::npos);
}

TEST_CASE("gridsearch writes one row per point and marks the best") {
  oracle::TempDir dir("cli");
  const auto cfg = dir.write("g.ini", std::string(kSmallRun) +
                                          "[grid]\nlearning_rate = 0.01, 0.003, 0.001\nlambda = 0.001, 1, 1000\n");
  const auto r = run({"gridsearch", "--config", cfg.string(), "--out", (dir / "g").string()});
  REQUIRE(r.code == 0);
  CHECK(dataLines(dir / "g" / "results.csv") == 9);
  const auto res = nlohmann::json::parse(oracle::slurp(dir / "g" / "results.json"));
  CHECK(res["rows"].size() == 9);
  CHECK(res["best_index"].is_number_integer());
  CHECK(fs::exists(dir / "g" / "best_model.txt"));

  const auto failing = dir.write("f.ini", std::string(kSmallRun) + "[grid]\nhidden_dim = 0, 8\n");
  const auto f = run({"gridsearch", "--config", failing.string(), "--out", (dir / "f").string()});
  CHECK(f.code == 0);
  const auto fr = nlohmann::json::parse(oracle::slurp(dir / "f" / "results.json"));
  CHECK(fr["best_index"].get<int>() == 1);
}

TEST_CASE("plotdata barrier, roc and loss-trace") {
  oracle::TempDir dir("cli");
  REQUIRE(run({"plotdata", "barrier", "--theta", "1", "--u-min", "0.5", "--u-max", "1.5", "--points", "3",
               "--out", dir.path().string()})
              .code == 0);
  bool sawZero = false;
  for (const auto& l : lines(oracle::slurp(dir / "barrier_curve.csv"))) {
    if (l.rfind("1,-1,", 0) == 0) {
      sawZero = true;
      CHECK(l == "1,-1,0");
    }
  }
  CHECK(sawZero);

  const auto scores = dir.write("s.csv", "row,error,label,decision\n0,0.1,target,target\n1,0.2,target,target\n"
                                         "2,0.8,outlier,other\n3,0.9,outlier,other\n");
  REQUIRE(run({"plotdata", "roc", "--scores", scores.string(), "--out", dir.path().string()}).code == 0);
  std::vector<occ::RocPoint> pts;
  for (const auto& l : lines(oracle::slurp(dir / "roc_points.csv"))) {
    if (l.empty() || l[0] == '#' || l[0] == 'f') continue;
    const auto comma = l.find(',');
    pts.push_back({std::stod(l.substr(0, comma)), std::stod(l.substr(comma + 1))});
  }
  bool corner = false;
  for (const auto& p : pts) corner = corner || (p.fpr == 0.0 && p.tpr == 1.0);
  CHECK(corner);
  CHECK(std::fabs(occ::trapezoidArea(pts) - 1.0) <= 1e-9);

  const auto cfg = dir.write("run.ini", kSmallRun);
  REQUIRE(run({"plotdata", "loss-trace", "--config", cfg.string(), "--out", dir.path().string()}).code == 0);
  CHECK(dataLines(dir / "batch_trace.csv") == 5 * 2);
}

TEST_CASE("gradcheck subcommand") {
  oracle::TempDir dir("cli");
  const auto r = run({"gradcheck", "--seeds", "2", "--out", dir.path().string()});
  CHECK(r.code == 0);
  CHECK(lines(r.out).size() == 5);
  for (const auto& l : lines(r.out)) CHECK(l.find("PASS") != std::string::npos);
  const auto j = nlohmann::json::parse(oracle::slurp(dir / "gradcheck.json"));
  CHECK(j.dump().find("worst") != std::string::npos);
}

TEST_CASE("synth output is reproducible and loads losslessly") {
  oracle::TempDir dir("cli");
  REQUIRE(run({"synth", "--seed", "3", "--out", (dir / "a").string()}).code == 0);
  REQUIRE(run({"synth", "--seed", "3", "--out", (dir / "b").string()}).code == 0);
  CHECK(oracle::slurp(dir / "a" / "synth.csv") == oracle::slurp(dir / "b" / "synth.csv"));
  const auto ds = occ::loadCsv(dir / "a" / "synth.csv");
  const auto ref = occ::synthGaussianRing(3, 500, 500, 2, 5.0);
  CHECK(ds.features == ref.features);
  CHECK(ds.labels == ref.labels);
}

TEST_CASE("model files round-trip exactly") {
  oracle::TempDir dir("cli");
  const auto ds = occ::synthGaussianRing(4, 40, 40, 2, 5.0);
  const auto split = occ::normalize(occ::makeOccSplit(ds, 0, occ::FractionSplit{0.5, 4}));
  occ::TrainConfig tc;
  tc.epochs = 3;
  tc.hiddenDim = 5;
  tc.outputDim = 3;
  tc.loss.kind = occ::LossKind::Sbl;
  cli::SavedModel saved{occ::train(split, tc), split.normalizer};
  cli::saveModel(saved, dir / "m.txt", {"note"});
  const auto back = cli::loadModel(dir / "m.txt");
  CHECK(back.model.params == saved.model.params);
  CHECK(back.model.sphere.center == saved.model.sphere.center);
  CHECK(back.model.sphere.radius == saved.model.sphere.radius);
  CHECK(back.model.sphere.threshold == saved.model.sphere.threshold);
  CHECK(back.model.config.loss.kind == occ::LossKind::Sbl);
  const auto p1 = occ::predict(saved.model, split.testFeatures);
  const auto p2 = occ::predict(back.model, split.testFeatures);
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].error == p2[i].error);

  const auto bad = dir.write("bad.txt", "occ-barrier-model 1\nloss LBL\nactivation tanh zero\n");
  CHECK_THROWS_WITH_AS(cli::loadModel(bad), doctest::Contains("line 3"), occ::IngestionError);
  CHECK_THROWS_AS(cli::loadModel(dir / "none.txt"), occ::Error);
}
