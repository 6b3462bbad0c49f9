#include "app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "log.hpp"
#include "model_io.hpp"
#include "occ/error.hpp"
#include "occ/gradcheck.hpp"
#include "occ/gridsearch.hpp"
#include "occ/losses.hpp"

namespace occ::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

LogLevel logLevelFromEnv() {
  const char* raw = std::getenv("OCC_BARRIER_LOG");
  if (raw == nullptr) return LogLevel::Warn;
  std::string v(raw);
  for (char& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "quiet" || v == "off" || v == "none") return LogLevel::Quiet;
  if (v == "error") return LogLevel::Error;
  if (v == "info") return LogLevel::Info;
  if (v == "debug" || v == "trace") return LogLevel::Debug;
  return LogLevel::Warn;
}

std::vector<std::size_t> readSplitFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open split file '" + path.string() + "'");
  std::vector<std::size_t> rows;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        if (tok.front() == '-') throw std::invalid_argument(tok);
        v = std::stoull(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw IngestionError(path.string() + ": line " + std::to_string(lineNo) + ": '" + tok +
                             "' is not a row index");
      }
      rows.push_back(static_cast<std::size_t>(v));
    }
  }
  return rows;
}

PreparedData prepareData(const DataSpec& spec) {
  PreparedData pd;
  if (spec.synthetic) {
    pd.dataset = synthGaussianRing(spec.synthSeed, spec.synthTargets, spec.synthOutliers,
                                   spec.synthDim, spec.synthRingRadius);
  } else {
    pd.dataset = loadCsv(spec.path, LabelColumn{spec.labelColumn});
  }
  pd.targetClass = spec.targetClass.value_or(pd.dataset.labels.front());
  SplitSpec split = FractionSplit{spec.trainFraction, spec.splitSeed};
  if (!spec.splitFile.empty()) split = ExplicitSplit{readSplitFile(spec.splitFile)};
  pd.split = normalize(makeOccSplit(pd.dataset, pd.targetClass, split));
  return pd;
}

ordered_json reportToJson(const EvaluationReport& report) {
  ordered_json j;
  j["auc_available"] = report.auc.has_value();
  j["auc"] = report.auc ? ordered_json(*report.auc) : ordered_json(nullptr);
  j["gmean"] = report.gmean ? ordered_json(*report.gmean) : ordered_json(nullptr);
  j["threshold"] = report.threshold;
  j["n_targets"] = report.nTargets;
  j["n_outliers"] = report.nOutliers;
  j["true_positives"] = report.counts.truePositives;
  j["false_positives"] = report.counts.falsePositives;
  j["true_negatives"] = report.counts.trueNegatives;
  j["false_negatives"] = report.counts.falseNegatives;
  return j;
}

namespace {

struct CommonOptions {
  std::string configPath;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string outDir;
};

void applyOverrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides) {
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    applyConfigValue(cfg, key, kv.substr(eq + 1));
  }
}

ExperimentConfig resolveConfig(const CommonOptions& opts) {
  ExperimentConfig cfg = opts.configPath.empty() ? ExperimentConfig{}
                                                 : loadExperimentConfig(opts.configPath, false);
  applyOverrides(cfg, opts.overrides);
  if (opts.seed) cfg.train.seed = *opts.seed;
  if (!opts.outDir.empty()) cfg.outDir = opts.outDir;
  validateConfig(cfg);
  return cfg;
}

/// Resolved config as embedded in artifacts; the output location is not part
/// of the experiment, so reruns into another directory stay byte-identical.
ordered_json experimentJson(const ExperimentConfig& cfg) {
  ordered_json j = toJson(cfg);
  j.erase("output");
  return j;
}

std::vector<std::string> experimentComments(const ExperimentConfig& cfg, const std::string& what) {
  std::vector<std::string> lines{what, "seed = " + std::to_string(cfg.train.seed)};
  for (auto& l : toCommentLines(cfg)) {
    if (l.rfind("output.", 0) != 0) lines.push_back(std::move(l));
  }
  return lines;
}

void writeText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IngestionError("failed writing '" + path.string() + "'");
}

void writeJson(const fs::path& path, const ordered_json& j) { writeText(path, dumpJson(j)); }

std::string commentBlock(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += "# " + l + "\n";
  return s;
}

void writeLossTrace(const fs::path& path, const TrainedModel& model,
                    const std::vector<std::string>& comments) {
  std::string s = commentBlock(comments) + "epoch,loss\n";
  for (std::size_t e = 0; e < model.lossHistory.size(); ++e) {
    s += std::to_string(e + 1) + "," + formatNumber(model.lossHistory[e]) + "\n";
  }
  writeText(path, s);
}

void writeScores(const fs::path& path, const OccSplit& split, const std::vector<Prediction>& preds,
                 const std::vector<std::string>& comments) {
  std::string s = commentBlock(comments) + "row,error,label,decision\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    s += std::to_string(split.testRows[i]) + "," + formatNumber(preds[i].error) + "," +
         toString(split.testLabels[i]) + "," + toString(preds[i].decision) + "\n";
  }
  writeText(path, s);
}

std::vector<ScoredSample> toScored(const OccSplit& split, const std::vector<Prediction>& preds) {
  std::vector<ScoredSample> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out[i] = {preds[i].error, split.testLabels[i]};
  return out;
}

ordered_json datasetJson(const PreparedData& pd) {
  std::size_t testTargets = 0;
  for (auto l : pd.split.testLabels) testTargets += l == SampleLabel::Target;
  ordered_json j;
  j["name"] = pd.dataset.name;
  j["rows"] = pd.dataset.labels.size();
  j["features"] = pd.dataset.features.cols();
  j["target_class"] = pd.targetClass;
  j["train_targets"] = pd.split.trainRows.size();
  j["train_non_targets_held_aside"] = pd.split.trainOutlierRows.size();
  j["test_targets"] = testTargets;
  j["test_outliers"] = pd.split.testLabels.size() - testTargets;
  return j;
}

ordered_json modelJson(const TrainedModel& m) {
  ordered_json j;
  j["loss"] = toString(m.config.loss.kind);
  j["input_dim"] = m.params.inputDim();
  j["hidden_dim"] = m.params.layers.front().weight.cols();
  j["output_dim"] = m.params.outputDim();
  j["parameters"] = m.params.parameterCount();
  j["center"] = m.sphere.center;
  j["radius"] = m.sphere.radius;
  j["threshold"] = m.sphere.threshold;
  return j;
}

ordered_json reportHeader(const char* command, const ExperimentConfig& cfg) {
  ordered_json j;
  j["format"] = "occ-barrier-report";
  j["version"] = 1;
  j["command"] = command;
  j["seed"] = cfg.train.seed;
  j["config"] = experimentJson(cfg);
  return j;
}

std::string summaryLine(const EvaluationReport& r) {
  std::string s = "auc=";
  s += r.auc ? formatNumber(*r.auc) : "na";
  s += " gmean=";
  s += r.gmean ? formatNumber(*r.gmean) : "na";
  s += " threshold=" + formatNumber(r.threshold);
  return s;
}

// -- train ------------------------------------------------------------------

int cmdTrain(const CommonOptions& opts, std::ostream& out, const Log& log) {
  ExperimentConfig cfg = resolveConfig(opts);
  PreparedData pd = prepareData(cfg.data);
  cfg.data.targetClass = pd.targetClass;
  log.info("training " + toString(cfg.train.loss.kind) + " on " + std::to_string(pd.split.trainRows.size()) +
           " target rows");

  const TrainedModel model = train(pd.split, cfg.train);
  const auto preds = predict(model, pd.split.testFeatures);
  const auto scored = toScored(pd.split, preds);
  const EvaluationReport rep = makeReport(scored, model.sphere.threshold);

  const fs::path dir = cfg.outDir;
  fs::create_directories(dir);
  const auto comments = experimentComments(cfg, "occ train");
  saveModel({model, pd.split.normalizer}, dir / "model.txt", comments);
  writeLossTrace(dir / "loss_trace.csv", model, comments);
  writeScores(dir / "scores.csv", pd.split, preds, comments);

  ordered_json report = reportHeader("train", cfg);
  report["dataset"] = datasetJson(pd);
  report["model"] = modelJson(model);
  report["training"] = {{"epochs", model.lossHistory.size()},
                        {"final_loss", model.lossHistory.back()},
                        {"loss_history", model.lossHistory}};
  report["evaluation"] = reportToJson(rep);
  writeJson(dir / "report.json", report);

  out << "train " << toString(cfg.train.loss.kind) << " " << summaryLine(rep) << " out=" << dir.string()
      << "\n";
  return kExitOk;
}

// -- eval -------------------------------------------------------------------

int cmdEval(const CommonOptions& opts, const std::string& modelPath, std::ostream& out) {
  ExperimentConfig cfg = resolveConfig(opts);
  SavedModel saved = loadModel(modelPath);
  PreparedData pd = prepareData(cfg.data);
  cfg.data.targetClass = pd.targetClass;
  if (saved.normalizer.ranges.size() != pd.dataset.features.cols()) {
    throw DimensionError("model expects " + std::to_string(saved.normalizer.ranges.size()) +
                         " features, dataset has " + std::to_string(pd.dataset.features.cols()));
  }
  // Re-map the raw test rows with the normalizer stored next to the model.
  const Matrix rawTest = selectRows(pd.dataset.features, pd.split.testRows);
  const Matrix test = saved.normalizer.apply(rawTest);
  const auto preds = predict(saved.model, test);
  const auto scored = toScored(pd.split, preds);
  const EvaluationReport rep = makeReport(scored, saved.model.sphere.threshold);

  const fs::path dir = cfg.outDir;
  fs::create_directories(dir);
  const auto comments = experimentComments(cfg, "occ eval model=" + fs::path(modelPath).filename().string());
  writeScores(dir / "eval_scores.csv", pd.split, preds, comments);
  ordered_json report = reportHeader("eval", cfg);
  report["model_file"] = fs::path(modelPath).filename().string();
  report["dataset"] = datasetJson(pd);
  report["model"] = modelJson(saved.model);
  report["evaluation"] = reportToJson(rep);
  writeJson(dir / "eval_report.json", report);
  out << "eval " << summaryLine(rep) << " out=" << dir.string() << "\n";
  return kExitOk;
}

// -- gridsearch -------------------------------------------------------------

int cmdGridSearch(const CommonOptions& opts, std::size_t jobs, std::ostream& out, const Log& log) {
  ExperimentConfig cfg = resolveConfig(opts);
  if (jobs == 0) throw ConfigError("--jobs must be >= 1");
  PreparedData pd = prepareData(cfg.data);
  cfg.data.targetClass = pd.targetClass;

  GridSearchOptions gopts;
  gopts.mode = cfg.selection;
  gopts.validationOutliers = pd.split.trainOutliers;
  gopts.validationFraction = cfg.validationFraction;
  gopts.jobs = jobs;
  if (cfg.selection == SelectionMode::ValidationAuc && pd.split.trainOutliers.rows() == 0) {
    log.warn("validation_auc selection needs non-target rows in the train partition; using training_loss");
  }
  const GridSearchResult res = gridSearch(pd.split, cfg.train, cfg.grid, gopts);

  const fs::path dir = cfg.outDir;
  fs::create_directories(dir);
  const auto comments = experimentComments(cfg, "occ gridsearch selection=" + toString(res.mode));

  std::string csv = commentBlock(comments) +
                    "index,learning_rate,lambda,lambda1,lambda2,hidden_dim,metric,test_auc,test_gmean,best,error\n";
  ordered_json rows = ordered_json::array();
  for (const auto& row : res.rows) {
    const bool best = res.best && *res.best == row.index;
    const auto& c = row.config;
    std::string err = row.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    const auto opt = [](const std::optional<double>& v) { return v ? formatNumber(*v) : std::string(); };
    std::optional<double> tAuc, tG;
    if (row.testReport) {
      tAuc = row.testReport->auc;
      tG = row.testReport->gmean;
    }
    csv += std::to_string(row.index) + "," + formatNumber(c.learningRate) + "," + formatNumber(c.loss.lambda) +
           "," + formatNumber(c.loss.lambda1) + "," + formatNumber(c.loss.lambda2) + "," +
           std::to_string(c.hiddenDim) + "," + opt(row.metric) + "," + opt(tAuc) + "," + opt(tG) + "," +
           (best ? "1" : "0") + "," + err + "\n";

    ordered_json r;
    r["index"] = row.index;
    r["learning_rate"] = c.learningRate;
    r["lambda"] = c.loss.lambda;
    r["lambda1"] = c.loss.lambda1;
    r["lambda2"] = c.loss.lambda2;
    r["hidden_dim"] = c.hiddenDim;
    r["metric"] = row.metric ? ordered_json(*row.metric) : ordered_json(nullptr);
    r["test"] = row.testReport ? reportToJson(*row.testReport) : ordered_json(nullptr);
    r["best"] = best;
    r["error"] = row.error.empty() ? ordered_json(nullptr) : ordered_json(row.error);
    rows.push_back(std::move(r));
  }
  writeText(dir / "results.csv", csv);

  ordered_json report = reportHeader("gridsearch", cfg);
  report["dataset"] = datasetJson(pd);
  report["selection"] = toString(res.mode);
  report["metric"] = res.mode == SelectionMode::TrainingLoss ? "final_training_loss" : "validation_auc";
  report["best_index"] = res.best ? ordered_json(*res.best) : ordered_json(nullptr);
  report["rows"] = std::move(rows);
  writeJson(dir / "results.json", report);

  if (!res.bestModel) {
    out << "gridsearch: every grid point failed; see " << (dir / "results.csv").string() << "\n";
    throw TrainingError("grid search produced no successful run");
  }
  saveModel({*res.bestModel, pd.split.normalizer}, dir / "best_model.txt", comments);
  const auto& bestRow = res.rows[*res.best];
  out << "gridsearch runs=" << res.rows.size() << " best=" << *res.best
      << " selection=" << toString(res.mode);
  if (bestRow.testReport) out << " " << summaryLine(*bestRow.testReport);
  out << " out=" << dir.string() << "\n";
  return kExitOk;
}

// -- gradcheck --------------------------------------------------------------

struct GradCheckCli {
  std::vector<std::string> losses{"MSE_OCL", "SBL", "LBL", "LBLSIG", "HRN"};
  std::uint64_t seed = 1;
  std::size_t seeds = 20;
  std::vector<std::size_t> dims{4, 6, 6, 2};
  std::string activation = "leaky_relu";
  std::optional<double> lambda;
  std::optional<double> tolerance;
  double step = 1e-5;
  bool truncated = false;
  bool regularizerOnly = false;
  std::string outDir;
};

int cmdGradCheck(const GradCheckCli& o, std::ostream& out) {
  if (o.seeds == 0) throw ConfigError("--seeds must be >= 1");
  GradCheckOptions base;
  base.step = o.step;
  base.tolerance = o.tolerance;
  base.activation.kind = parseActivationKind(o.activation);
  if (o.lambda) base.loss.lambda = base.loss.lambda2 = *o.lambda;
  base.forceTruncatedSample = o.truncated;
  base.regularizerOnly = o.regularizerOnly;

  bool allPassed = true;
  ordered_json results = ordered_json::array();
  for (const auto& name : o.losses) {
    const LossKind kind = parseLossKind(name);
    double worstRel = 0.0, worstAbs = 0.0;
    std::size_t failures = 0;
    for (std::size_t s = 0; s < o.seeds; ++s) {
      const auto rep = checkLossGradient(kind, o.dims, o.seed + s, base);
      worstRel = std::max(worstRel, rep.maxRelError);
      worstAbs = std::max(worstAbs, rep.maxAbsError);
      ordered_json j;
      j["loss"] = toString(kind);
      j["seed"] = rep.seed;
      j["dims"] = rep.dims;
      j["step"] = rep.step;
      j["tolerance"] = rep.tolerance;
      j["max_rel_error"] = rep.maxRelError;
      j["max_abs_error"] = rep.maxAbsError;
      j["worst"] = {{"layer", rep.worst.layer},
                    {"row", rep.worst.row},
                    {"col", rep.worst.col},
                    {"bias", rep.worst.isBias}};
      j["parameters_checked"] = rep.parametersChecked;
      j["samples_truncated"] = rep.samplesTruncated;
      j["passed"] = rep.passed;
      if (!rep.passed) {
        ++failures;
        j["failure"] = rep.failure;
      }
      results.push_back(std::move(j));
    }
    allPassed = allPassed && failures == 0;
    out << "gradcheck " << toString(kind) << " seeds=" << o.seeds << " max_rel=" << formatNumber(worstRel)
        << " max_abs=" << formatNumber(worstAbs) << " " << (failures == 0 ? "PASS" : "FAIL") << "\n";
  }
  if (!o.outDir.empty()) {
    fs::create_directories(o.outDir);
    ordered_json doc;
    doc["format"] = "occ-barrier-gradcheck";
    doc["version"] = 1;
    doc["seed"] = o.seed;
    doc["activation"] = o.activation;
    doc["regularizer_only"] = o.regularizerOnly;
    doc["forced_truncation"] = o.truncated;
    doc["passed"] = allPassed;
    doc["checks"] = std::move(results);
    writeJson(fs::path(o.outDir) / "gradcheck.json", doc);
  }
  return allPassed ? kExitOk : kExitInternal;
}

// -- synth ------------------------------------------------------------------

int cmdSynth(const CommonOptions& opts, std::ostream& out) {
  ExperimentConfig cfg = opts.configPath.empty() ? ExperimentConfig{} : loadExperimentConfig(opts.configPath, false);
  cfg.data.synthetic = true;
  applyOverrides(cfg, opts.overrides);
  if (opts.seed) cfg.data.synthSeed = *opts.seed;
  if (!opts.outDir.empty()) cfg.outDir = opts.outDir;
  validateConfig(cfg);

  const Dataset ds = synthGaussianRing(cfg.data.synthSeed, cfg.data.synthTargets, cfg.data.synthOutliers,
                                       cfg.data.synthDim, cfg.data.synthRingRadius);
  const fs::path dir = cfg.outDir;
  fs::create_directories(dir);
  const fs::path file = dir / "synth.csv";
  writeCsv(ds, file,
           {"occ synth gaussian ring", "seed = " + std::to_string(cfg.data.synthSeed),
            "targets = " + std::to_string(cfg.data.synthTargets) + " (label 0)",
            "outliers = " + std::to_string(cfg.data.synthOutliers) + " (label 1)",
            "dim = " + std::to_string(cfg.data.synthDim),
            "ring_radius = " + formatNumber(cfg.data.synthRingRadius)});
  out << "synth rows=" << ds.labels.size() << " out=" << file.string() << "\n";
  return kExitOk;
}

// -- plotdata ---------------------------------------------------------------

struct PlotCli {
  std::string kind;
  std::vector<double> thetas{0.5, 1.0, 2.0};
  double uMin = 1e-3;
  double uMax = 2.0;
  std::size_t points = 1000;
  std::string scores;
};

int cmdPlotData(const CommonOptions& opts, const PlotCli& p, std::ostream& out) {
  const fs::path dir = opts.outDir.empty() ? fs::path("occ_out") : fs::path(opts.outDir);
  if (p.kind == "barrier") {
    const auto grid = barrierGrid(p.uMin, p.uMax, p.points);
    const auto curve = barrierCurve(p.thetas, grid);
    fs::create_directories(dir);
    std::string s = commentBlock({"occ plotdata barrier", "value = -(1/theta) log(-u)",
                                  "u_min = " + formatNumber(p.uMin), "u_max = " + formatNumber(p.uMax),
                                  "points = " + std::to_string(p.points)}) +
                    "theta,u,value\n";
    for (const auto& pt : curve) {
      s += formatNumber(pt.theta) + "," + formatNumber(pt.u) + "," + formatNumber(pt.value) + "\n";
    }
    writeText(dir / "barrier_curve.csv", s);
    out << "plotdata barrier points=" << curve.size() << " out=" << (dir / "barrier_curve.csv").string()
        << "\n";
    return kExitOk;
  }
  if (p.kind == "loss-trace") {
    ExperimentConfig cfg = resolveConfig(opts);
    PreparedData pd = prepareData(cfg.data);
    cfg.data.targetClass = pd.targetClass;
    std::string rows;
    const auto observer = [&](const BatchTrace& t) {
      double mean = 0.0;
      for (double d : t.distances) mean += d;
      mean /= static_cast<double>(std::max<std::size_t>(t.distances.size(), 1));
      rows += std::to_string(t.epoch + 1) + "," + std::to_string(t.batch) + "," + formatNumber(t.loss) + "," +
              formatNumber(t.radius) + "," + (t.radiusUpdated ? "1" : "0") + "," + formatNumber(mean) + "\n";
    };
    train(pd.split, cfg.train, observer);
    fs::create_directories(cfg.outDir);
    const fs::path file = fs::path(cfg.outDir) / "batch_trace.csv";
    writeText(file, commentBlock(experimentComments(cfg, "occ plotdata loss-trace")) +
                        "epoch,batch,loss,radius,radius_updated,mean_distance\n" + rows);
    out << "plotdata loss-trace out=" << file.string() << "\n";
    return kExitOk;
  }
  if (p.kind == "roc") {
    if (p.scores.empty()) throw ConfigError("plotdata roc needs --scores FILE (scores.csv from train)");
    std::ifstream in(p.scores);
    if (!in) throw IngestionError("cannot open scores file '" + p.scores + "'");
    std::vector<ScoredSample> samples;
    std::string line;
    std::size_t lineNo = 0;
    bool header = true;
    while (std::getline(in, line)) {
      ++lineNo;
      if (line.empty() || line.front() == '#') continue;
      if (header) {
        header = false;
        continue;
      }
      std::istringstream ss(line);
      std::string row, err, label;
      std::getline(ss, row, ',');
      std::getline(ss, err, ',');
      std::getline(ss, label, ',');
      ScoredSample smp;
      try {
        smp.error = std::stod(err);
      } catch (const std::exception&) {
        throw IngestionError(p.scores + ": line " + std::to_string(lineNo) + ": bad error value '" + err + "'");
      }
      if (label == toString(SampleLabel::Target)) {
        smp.label = SampleLabel::Target;
      } else if (label == toString(SampleLabel::Outlier)) {
        smp.label = SampleLabel::Outlier;
      } else {
        throw IngestionError(p.scores + ": line " + std::to_string(lineNo) + ": bad label '" + label + "'");
      }
      samples.push_back(smp);
    }
    const auto roc = rocCurve(samples);
    fs::create_directories(dir);
    std::string s = commentBlock({"occ plotdata roc", "source = " + fs::path(p.scores).filename().string(),
                                  "positive = outlier flagged (error above cut)",
                                  "auc = " + formatNumber(trapezoidArea(roc))}) +
                    "fpr,tpr\n";
    for (const auto& pt : roc) s += formatNumber(pt.fpr) + "," + formatNumber(pt.tpr) + "\n";
    writeText(dir / "roc_points.csv", s);
    out << "plotdata roc points=" << roc.size() << " out=" << (dir / "roc_points.csv").string() << "\n";
    return kExitOk;
  }
  throw ConfigError("unknown plot kind '" + p.kind + "' (expected barrier, loss-trace, roc)");
}

std::string oneLine(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

void addCommon(CLI::App* sub, CommonOptions& o, bool needConfig) {
  auto* c = sub->add_option("--config", o.configPath, "Experiment config (.json or key=value sections)");
  if (needConfig) c->required();
  sub->add_option("--set", o.overrides, "Override a config key, e.g. --set train.epochs=50")
      ->take_all()
      ->allow_extra_args(false);
  sub->add_option("--seed", o.seed, "Training seed (overrides train.seed)");
  sub->add_option("--out", o.outDir, "Output directory (overrides output.dir)");
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Log log(err);
  CLI::App app{"One-class classification with barrier losses", "occ"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  CommonOptions trainOpts, evalOpts, gridOpts, synthOpts, plotOpts;
  std::string modelPath;
  std::size_t jobs = 1;
  GradCheckCli gc;
  PlotCli plot;

  auto* trainCmd = app.add_subcommand("train", "Train one model, evaluate it and write artifacts");
  addCommon(trainCmd, trainOpts, true);

  auto* evalCmd = app.add_subcommand("eval", "Score a saved model on the configured test split");
  addCommon(evalCmd, evalOpts, true);
  evalCmd->add_option("--model", modelPath, "Model file written by train or gridsearch")->required();

  auto* gridCmd = app.add_subcommand("gridsearch", "Train one model per grid point and select the best");
  addCommon(gridCmd, gridOpts, true);
  gridCmd->add_option("--jobs", jobs, "Concurrent runs (default 1, bit-reproducible ordering either way)");

  auto* gcCmd = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  gcCmd->add_option("--loss", gc.losses, "Loss kinds to check (default: all)")->delimiter(',');
  gcCmd->add_option("--seed", gc.seed, "First seed");
  gcCmd->add_option("--seeds", gc.seeds, "Number of consecutive seeds");
  gcCmd->add_option("--dims", gc.dims, "Layer widths, e.g. 4,6,6,2")->delimiter(',');
  gcCmd->add_option("--activation", gc.activation, "relu, leaky_relu or tanh");
  gcCmd->add_option("--lambda", gc.lambda, "Weight decay / H-regularizer weight");
  gcCmd->add_option("--tolerance", gc.tolerance, "Relative tolerance (default 1e-5, HRN 1e-4)");
  gcCmd->add_option("--step", gc.step, "Finite-difference step");
  gcCmd->add_flag("--truncated", gc.truncated, "LBLSig: push one sample past the truncation point");
  gcCmd->add_flag("--regularizer-only", gc.regularizerOnly, "Check the weight-decay term alone");
  gcCmd->add_option("--out", gc.outDir, "Write gradcheck.json here");

  auto* synthCmd = app.add_subcommand("synth", "Write the synthetic Gaussian-vs-ring dataset as CSV");
  addCommon(synthCmd, synthOpts, false);

  auto* plotCmd = app.add_subcommand("plotdata", "Emit plot-ready CSV points");
  addCommon(plotCmd, plotOpts, false);
  plotCmd->add_option("kind", plot.kind, "barrier, loss-trace or roc")->required();
  plotCmd->add_option("--theta", plot.thetas, "Barrier precisions")->delimiter(',');
  plotCmd->add_option("--u-min", plot.uMin, "Smallest |u| on the barrier grid");
  plotCmd->add_option("--u-max", plot.uMax, "Largest |u| on the barrier grid");
  plotCmd->add_option("--points", plot.points, "Barrier grid size");
  plotCmd->add_option("--scores", plot.scores, "scores.csv for the roc kind");

  std::vector<std::string> argvStore{"occ"};
  argvStore.insert(argvStore.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argvStore) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: kind=usage message=" << oneLine(e.what()) << "\n";
    return kExitUser;
  }

  try {
    if (*trainCmd) return cmdTrain(trainOpts, out, log);
    if (*evalCmd) return cmdEval(evalOpts, modelPath, out);
    if (*gridCmd) return cmdGridSearch(gridOpts, jobs, out, log);
    if (*gcCmd) return cmdGradCheck(gc, out);
    if (*synthCmd) return cmdSynth(synthOpts, out);
    if (*plotCmd) return cmdPlotData(plotOpts, plot, out);
  } catch (const ConfigError& e) {
    err << "error: kind=config message=" << oneLine(e.what()) << "\n";
    return kExitUser;
  } catch (const IngestionError& e) {
    err << "error: kind=ingestion message=" << oneLine(e.what()) << "\n";
    return kExitUser;
  } catch (const ValidationError& e) {
    err << "error: kind=validation message=" << oneLine(e.what()) << "\n";
    return kExitUser;
  } catch (const UnsupportedConfigError& e) {
    err << "error: kind=unsupported message=" << oneLine(e.what()) << "\n";
    return kExitUser;
  } catch (const DimensionError& e) {
    err << "error: kind=dimension message=" << oneLine(e.what()) << "\n";
    return kExitUser;
  } catch (const TrainingError& e) {
    err << "error: kind=training message=" << oneLine(e.what()) << "\n";
    return kExitInternal;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: kind=io message=" << oneLine(e.what()) << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    err << "error: kind=internal message=" << oneLine(e.what()) << "\n";
    return kExitInternal;
  }
  err << "error: kind=usage message=no subcommand given\n";
  return kExitUser;
}

}  // namespace occ::cli
