#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace occ::cli {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void badValue(const std::string& key, const std::string& expected,
                           const std::string& got) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + got + "'");
}

double parseDouble(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  double out = 0.0;
  const char* first = v.data();
  if (!v.empty() && v.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    badValue(key, "a finite number", value);
  }
  return out;
}

std::uint64_t parseUnsigned(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    badValue(key, "a non-negative integer", value);
  }
  return out;
}

std::size_t parseCount(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(parseUnsigned(key, value));
}

ClassId parseClass(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  ClassId out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    badValue(key, "an integer class id", value);
  }
  return out;
}

bool parseBool(const std::string& key, const std::string& value) {
  const std::string v = lower(trim(value));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  badValue(key, "true or false", value);
}

std::vector<std::string> splitList(const std::string& value) {
  std::vector<std::string> items;
  std::string v = trim(value);
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> parseDoubleList(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : splitList(value)) out.push_back(parseDouble(key, item));
  return out;
}

std::vector<std::size_t> parseCountList(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& item : splitList(value)) out.push_back(parseCount(key, item));
  return out;
}

std::string joinNumbers(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += formatNumber(values[i]);
  }
  return out;
}

std::string joinCounts(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(values[i]);
  }
  return out;
}

template <class F>
auto rethrowAsConfig(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const occ::Error& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    // [data]
    t["data.path"] = [](auto& c, auto&, auto& v) { c.data.path = trim(v); };
    t["data.synthetic"] = [](auto& c, auto& k, auto& v) { c.data.synthetic = parseBool(k, v); };
    t["data.synth_seed"] = [](auto& c, auto& k, auto& v) { c.data.synthSeed = parseUnsigned(k, v); };
    t["data.synth_targets"] = [](auto& c, auto& k, auto& v) { c.data.synthTargets = parseCount(k, v); };
    t["data.synth_outliers"] = [](auto& c, auto& k, auto& v) { c.data.synthOutliers = parseCount(k, v); };
    t["data.synth_dim"] = [](auto& c, auto& k, auto& v) { c.data.synthDim = parseCount(k, v); };
    t["data.synth_ring_radius"] = [](auto& c, auto& k, auto& v) {
      c.data.synthRingRadius = parseDouble(k, v);
    };
    t["data.label_column"] = [](auto& c, auto& k, auto& v) {
      if (lower(trim(v)) == "last") {
        c.data.labelColumn.reset();
      } else {
        c.data.labelColumn = parseCount(k, v);
      }
    };
    t["data.target_class"] = [](auto& c, auto& k, auto& v) {
      if (lower(trim(v)) == "first") {
        c.data.targetClass.reset();
      } else {
        c.data.targetClass = parseClass(k, v);
      }
    };
    t["data.train_fraction"] = [](auto& c, auto& k, auto& v) { c.data.trainFraction = parseDouble(k, v); };
    t["data.split_seed"] = [](auto& c, auto& k, auto& v) { c.data.splitSeed = parseUnsigned(k, v); };
    t["data.split_file"] = [](auto& c, auto&, auto& v) { c.data.splitFile = trim(v); };
    // [loss]
    t["loss.kind"] = [](auto& c, auto& k, auto& v) {
      c.train.loss.kind = rethrowAsConfig(k, [&] { return parseLossKind(trim(v)); });
    };
    t["loss.theta"] = [](auto& c, auto& k, auto& v) { c.train.loss.theta = parseDouble(k, v); };
    t["loss.q"] = [](auto& c, auto& k, auto& v) { c.train.loss.qTrunc = parseDouble(k, v); };
    t["loss.lambda"] = [](auto& c, auto& k, auto& v) { c.train.loss.lambda = parseDouble(k, v); };
    t["loss.lambda1"] = [](auto& c, auto& k, auto& v) { c.train.loss.lambda1 = parseDouble(k, v); };
    t["loss.lambda2"] = [](auto& c, auto& k, auto& v) { c.train.loss.lambda2 = parseDouble(k, v); };
    t["loss.nu"] = [](auto& c, auto& k, auto& v) { c.train.loss.nu = parseDouble(k, v); };
    t["loss.hrn_exponent"] = [](auto& c, auto& k, auto& v) { c.train.loss.hrnExponent = parseDouble(k, v); };
    t["loss.radius_quantile"] = [](auto& c, auto& k, auto& v) {
      c.train.loss.radiusQuantile = parseDouble(k, v);
    };
    t["loss.radius_update_period"] = [](auto& c, auto& k, auto& v) {
      c.train.loss.radiusUpdatePeriod = parseCount(k, v);
    };
    t["loss.eps_log"] = [](auto& c, auto& k, auto& v) { c.train.loss.epsLog = parseDouble(k, v); };
    t["loss.discard_outside"] = [](auto& c, auto& k, auto& v) {
      c.train.loss.discardOutside = parseBool(k, v);
    };
    // [train]
    t["train.epochs"] = [](auto& c, auto& k, auto& v) { c.train.epochs = parseCount(k, v); };
    t["train.batch_size"] = [](auto& c, auto& k, auto& v) { c.train.batchSize = parseCount(k, v); };
    t["train.learning_rate"] = [](auto& c, auto& k, auto& v) { c.train.learningRate = parseDouble(k, v); };
    t["train.seed"] = [](auto& c, auto& k, auto& v) { c.train.seed = parseUnsigned(k, v); };
    t["train.reject_fraction"] = [](auto& c, auto& k, auto& v) {
      c.train.rejectFraction = parseDouble(k, v);
    };
    t["train.shuffle"] = [](auto& c, auto& k, auto& v) { c.train.shuffle = parseBool(k, v); };
    t["train.hidden_dim"] = [](auto& c, auto& k, auto& v) { c.train.hiddenDim = parseCount(k, v); };
    t["train.output_dim"] = [](auto& c, auto& k, auto& v) { c.train.outputDim = parseCount(k, v); };
    t["train.activation"] = [](auto& c, auto& k, auto& v) {
      c.train.activation.kind = rethrowAsConfig(k, [&] { return parseActivationKind(lower(trim(v))); });
    };
    t["train.leaky_slope"] = [](auto& c, auto& k, auto& v) { c.train.activation.slope = parseDouble(k, v); };
    t["train.center_policy"] = [](auto& c, auto& k, auto& v) {
      c.train.centerPolicy = rethrowAsConfig(k, [&] { return parseCenterPolicy(lower(trim(v))); });
    };
    t["train.fixed_center"] = [](auto& c, auto& k, auto& v) { c.train.fixedCenter = parseDoubleList(k, v); };
    // [grid]
    t["grid.learning_rate"] = [](auto& c, auto& k, auto& v) { c.grid.learningRates = parseDoubleList(k, v); };
    t["grid.lambda"] = [](auto& c, auto& k, auto& v) { c.grid.lambdas = parseDoubleList(k, v); };
    t["grid.lambda1"] = [](auto& c, auto& k, auto& v) { c.grid.lambda1s = parseDoubleList(k, v); };
    t["grid.lambda2"] = [](auto& c, auto& k, auto& v) { c.grid.lambda2s = parseDoubleList(k, v); };
    t["grid.hidden_dim"] = [](auto& c, auto& k, auto& v) { c.grid.hiddenDims = parseCountList(k, v); };
    t["grid.selection"] = [](auto& c, auto& k, auto& v) {
      c.selection = rethrowAsConfig(k, [&] { return parseSelectionMode(lower(trim(v))); });
    };
    t["grid.validation_fraction"] = [](auto& c, auto& k, auto& v) {
      c.validationFraction = parseDouble(k, v);
    };
    // [output]
    t["output.dir"] = [](auto& c, auto&, auto& v) { c.outDir = trim(v); };
    return t;
  }();
  return table;
}

void validateImpl(const ExperimentConfig& cfg) {
  try {
    cfg.train.validate();
  } catch (const occ::Error& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  if (!cfg.data.synthetic && cfg.data.path.empty()) {
    throw ConfigError("config key 'data.path': no dataset given (set data.path or data.synthetic = true)");
  }
  if (cfg.data.synthetic) {
    if (cfg.data.synthTargets == 0) throw ConfigError("config key 'data.synth_targets': must be >= 1");
    if (cfg.data.synthDim < 2) throw ConfigError("config key 'data.synth_dim': must be >= 2");
    if (!(cfg.data.synthRingRadius > 0.0)) {
      throw ConfigError("config key 'data.synth_ring_radius': must be > 0");
    }
  }
  if (!(cfg.data.trainFraction > 0.0 && cfg.data.trainFraction <= 1.0)) {
    throw ConfigError("config key 'data.train_fraction': must lie in (0, 1]");
  }
  if (!(cfg.validationFraction > 0.0 && cfg.validationFraction < 1.0)) {
    throw ConfigError("config key 'grid.validation_fraction': must lie in (0, 1)");
  }
  if (cfg.outDir.empty()) throw ConfigError("config key 'output.dir': must not be empty");
}

std::string jsonScalarToString(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return formatNumber(v.get<double>());
  if (v.is_null()) return "";
  throw ConfigError("config key '" + key + "': expected a scalar or list of scalars");
}

}  // namespace

std::string formatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dumpInto(std::string& out, const nlohmann::ordered_json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string closePad(static_cast<std::size_t>(2 * depth), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      if (!first) out += ",\n";
      first = false;
      out += pad + nlohmann::ordered_json(key).dump() + ": ";
      dumpInto(out, value, depth + 1);
    }
    out += "\n" + closePad + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      dumpInto(out, j[i], depth + 1);
    }
    out += "\n" + closePad + "]";
  } else if (j.is_number_float()) {
    const double v = j.get<double>();
    out += std::isfinite(v) ? formatNumber(v) : "null";
  } else {
    out += j.dump();
  }
}

}  // namespace

std::string dumpJson(const nlohmann::ordered_json& doc) {
  std::string out;
  dumpInto(out, doc, 0);
  out += '\n';
  return out;
}

void validateConfig(const ExperimentConfig& cfg) { validateImpl(cfg); }

void applyConfigValue(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, key, value);
}

ExperimentConfig parseKeyValueConfig(std::string_view text, bool validate) {
  ExperimentConfig cfg;
  std::string section;
  std::size_t lineNo = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineNo;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(lineNo) + ": unterminated section header");
      }
      section = lower(trim(std::string_view(line).substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineNo) + ": expected 'key = value'");
    }
    std::string key = lower(trim(std::string_view(line).substr(0, eq)));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    // trailing comment after whitespace
    for (const char* marker : {" #", "\t#", " ;", "\t;"}) {
      const auto pos = value.find(marker);
      if (pos != std::string::npos) value = trim(std::string_view(value).substr(0, pos));
    }
    if (key.find('.') == std::string::npos) {
      if (section.empty()) {
        throw ConfigError("config line " + std::to_string(lineNo) + ": key '" + key +
                          "' appears before any [section]");
      }
      key = section + "." + key;
    }
    applyConfigValue(cfg, key, value);
  }
  if (validate) validateImpl(cfg);
  return cfg;
}

ExperimentConfig parseJsonConfig(const nlohmann::json& doc, bool validate) {
  if (!doc.is_object()) throw ConfigError("JSON config must be an object of sections");
  ExperimentConfig cfg;
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) {
      throw ConfigError("config section '" + section + "' must be a JSON object");
    }
    for (const auto& [name, value] : body.items()) {
      const std::string key = lower(section) + "." + lower(name);
      std::string text;
      if (value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i) {
          if (i) text += ", ";
          text += jsonScalarToString(key, value[i]);
        }
      } else {
        text = jsonScalarToString(key, value);
      }
      applyConfigValue(cfg, key, text);
    }
  }
  if (validate) validateImpl(cfg);
  return cfg;
}

ExperimentConfig loadExperimentConfig(const std::filesystem::path& path, bool validate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  if (lower(path.extension().string()) == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parseJsonConfig(doc, validate);
  }
  return parseKeyValueConfig(buf.str(), validate);
}

nlohmann::ordered_json toJson(const ExperimentConfig& cfg) {
  using nlohmann::ordered_json;
  ordered_json data;
  if (cfg.data.synthetic) {
    data["synthetic"] = true;
    data["synth_seed"] = cfg.data.synthSeed;
    data["synth_targets"] = cfg.data.synthTargets;
    data["synth_outliers"] = cfg.data.synthOutliers;
    data["synth_dim"] = cfg.data.synthDim;
    data["synth_ring_radius"] = cfg.data.synthRingRadius;
  } else {
    data["synthetic"] = false;
    data["path"] = cfg.data.path;
  }
  if (cfg.data.labelColumn) {
    data["label_column"] = *cfg.data.labelColumn;
  } else {
    data["label_column"] = "last";
  }
  if (cfg.data.targetClass) {
    data["target_class"] = *cfg.data.targetClass;
  } else {
    data["target_class"] = "first";
  }
  if (cfg.data.splitFile.empty()) {
    data["train_fraction"] = cfg.data.trainFraction;
    data["split_seed"] = cfg.data.splitSeed;
  } else {
    data["split_file"] = cfg.data.splitFile;
  }

  const LossConfig& l = cfg.train.loss;
  ordered_json loss;
  loss["kind"] = toString(l.kind);
  loss["theta"] = l.theta;
  loss["q"] = l.qTrunc;
  loss["lambda"] = l.lambda;
  loss["lambda1"] = l.lambda1;
  loss["lambda2"] = l.lambda2;
  loss["nu"] = l.nu;
  loss["hrn_exponent"] = l.hrnExponent;
  loss["radius_quantile"] = l.radiusQuantile;
  loss["radius_update_period"] = l.radiusUpdatePeriod;
  loss["eps_log"] = l.epsLog;
  loss["discard_outside"] = l.discardOutside;

  const TrainConfig& t = cfg.train;
  ordered_json train;
  train["epochs"] = t.epochs;
  train["batch_size"] = t.batchSize;
  train["learning_rate"] = t.learningRate;
  train["seed"] = t.seed;
  train["reject_fraction"] = t.rejectFraction;
  train["shuffle"] = t.shuffle;
  train["hidden_dim"] = t.hiddenDim;
  train["output_dim"] = t.outputDim;
  train["activation"] = toString(t.activation.kind);
  train["leaky_slope"] = t.activation.slope;
  train["center_policy"] = toString(t.centerPolicy);
  if (!t.fixedCenter.empty()) train["fixed_center"] = t.fixedCenter;

  ordered_json grid;
  grid["learning_rate"] = cfg.grid.learningRates;
  grid["lambda"] = cfg.grid.lambdas;
  grid["lambda1"] = cfg.grid.lambda1s;
  grid["lambda2"] = cfg.grid.lambda2s;
  grid["hidden_dim"] = cfg.grid.hiddenDims;
  grid["selection"] = toString(cfg.selection);
  grid["validation_fraction"] = cfg.validationFraction;

  ordered_json out;
  out["data"] = std::move(data);
  out["loss"] = std::move(loss);
  out["train"] = std::move(train);
  out["grid"] = std::move(grid);
  out["output"] = ordered_json{{"dir", cfg.outDir}};
  return out;
}

std::vector<std::string> toCommentLines(const ExperimentConfig& cfg) {
  std::vector<std::string> lines;
  const auto doc = toJson(cfg);
  for (const auto& [section, body] : doc.items()) {
    for (const auto& [key, value] : body.items()) {
      std::string text;
      if (value.is_string()) {
        text = value.get<std::string>();
      } else if (value.is_number_float()) {
        text = formatNumber(value.get<double>());
      } else if (value.is_array()) {
        if (!value.empty() && value[0].is_number_float()) {
          text = joinNumbers(value.get<std::vector<double>>());
        } else if (!value.empty()) {
          text = joinCounts(value.get<std::vector<std::size_t>>());
        }
      } else {
        text = value.dump();
      }
      lines.push_back(section + "." + key + " = " + text);
    }
  }
  return lines;
}

}  // namespace occ::cli
