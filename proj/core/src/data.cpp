#include "occ/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "occ/error.hpp"
#include "occ/rng.hpp"

namespace occ {

void Dataset::validate() const {
  if (features.cols() == 0) throw ValidationError("dataset '" + name + "' has no feature columns");
  if (labels.size() != features.rows()) {
    throw ValidationError("dataset '" + name + "': " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(features.rows()) + " rows");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> splitCells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parseNumber(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

std::string formatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset loadCsv(const std::filesystem::path& path, LabelColumn labelColumn) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open dataset file '" + path.string() + "'");

  Dataset ds;
  ds.name = path.stem().string();
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t labelIdx = 0;
  bool sawFirst = false;
  std::size_t lineNo = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto cells = splitCells(view);

    std::vector<double> parsed(cells.size());
    std::optional<std::size_t> badColumn;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parseNumber(cells[c]);
      if (!v) {
        if (!badColumn) badColumn = c;
        continue;
      }
      parsed[c] = *v;
    }

    if (!sawFirst) {
      sawFirst = true;
      width = cells.size();
      if (width < 2) {
        throw IngestionError(path.string() + ": row " + std::to_string(lineNo) +
                             " needs at least one feature and a label column");
      }
      labelIdx = labelColumn.index.value_or(width - 1);
      if (labelIdx >= width) {
        throw IngestionError(path.string() + ": label column " + std::to_string(labelIdx) +
                             " out of range for " + std::to_string(width) + " columns");
      }
      if (badColumn) continue;  // header row
    }

    if (cells.size() != width) {
      throw IngestionError(path.string() + ": row " + std::to_string(lineNo) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(width));
    }
    if (badColumn) {
      throw IngestionError(path.string() + ": row " + std::to_string(lineNo) + ", column " +
                           std::to_string(*badColumn + 1) + ": '" +
                           std::string(cells[*badColumn]) + "' is not numeric");
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (c == labelIdx) continue;
      if (!std::isfinite(parsed[c])) {
        throw IngestionError(path.string() + ": row " + std::to_string(lineNo) + ", column " +
                             std::to_string(c + 1) + ": non-finite value");
      }
      values.push_back(parsed[c]);
    }
    const double label = parsed[labelIdx];
    if (!std::isfinite(label) || label != std::floor(label) || std::fabs(label) > 9e15) {
      throw IngestionError(path.string() + ": row " + std::to_string(lineNo) +
                           ": label '" + std::string(cells[labelIdx]) +
                           "' is not an integer class id");
    }
    ds.labels.push_back(static_cast<ClassId>(label));
  }
  if (ds.labels.empty()) throw IngestionError(path.string() + ": no data rows");
  ds.features = Matrix(ds.labels.size(), width - 1, std::move(values));
  return ds;
}

void writeCsv(const Dataset& dataset, const std::filesystem::path& path,
              const std::vector<std::string>& comments) {
  dataset.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write dataset file '" + path.string() + "'");
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t j = 0; j < dataset.features.cols(); ++j) out << 'x' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < dataset.features.rows(); ++i) {
    for (double v : dataset.features.row(i)) out << formatDouble(v) << ',';
    out << dataset.labels[i] << '\n';
  }
  if (!out) throw IngestionError("failed writing dataset file '" + path.string() + "'");
}

Normalizer Normalizer::fit(const Matrix& data) {
  if (data.rows() == 0) throw ValidationError("cannot fit a normalizer on zero rows");
  Normalizer n;
  n.ranges.resize(data.cols());
  for (std::size_t j = 0; j < data.cols(); ++j) {
    n.ranges[j] = {data(0, j), data(0, j)};
  }
  for (std::size_t i = 1; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      n.ranges[j].min = std::min(n.ranges[j].min, data(i, j));
      n.ranges[j].max = std::max(n.ranges[j].max, data(i, j));
    }
  }
  return n;
}

Matrix Normalizer::apply(const Matrix& data) const {
  if (data.empty()) return data;
  if (data.cols() != ranges.size()) {
    throw DimensionError("normalizer fitted on " + std::to_string(ranges.size()) +
                         " features applied to " + std::to_string(data.cols()));
  }
  Matrix out(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      const auto [lo, hi] = ranges[j];
      if (hi <= lo) continue;  // constant feature -> 0
      const double x = 2.0 * (data(i, j) - lo) / (hi - lo) - 1.0;
      out(i, j) = std::clamp(x, -1.0, 1.0);
    }
  }
  return out;
}

OccSplit makeOccSplit(const Dataset& dataset, ClassId targetClass, const SplitSpec& spec) {
  dataset.validate();
  const std::size_t n = dataset.labels.size();
  std::vector<std::size_t> targetRows;
  for (std::size_t i = 0; i < n; ++i) {
    if (dataset.labels[i] == targetClass) targetRows.push_back(i);
  }
  if (targetRows.empty()) {
    throw ValidationError("target class " + std::to_string(targetClass) +
                          " does not occur in dataset '" + dataset.name + "'");
  }

  std::vector<bool> inTrainPartition(n, false);
  if (const auto* frac = std::get_if<FractionSplit>(&spec)) {
    if (!(frac->trainFraction > 0.0 && frac->trainFraction <= 1.0)) {
      throw ValidationError("train fraction must lie in (0, 1]");
    }
    Rng rng(frac->seed);
    std::vector<std::size_t> shuffled = targetRows;
    rng.shuffle(shuffled);
    auto nTrain = static_cast<std::size_t>(
        std::llround(frac->trainFraction * static_cast<double>(shuffled.size())));
    nTrain = std::clamp<std::size_t>(nTrain, 1, shuffled.size());
    for (std::size_t k = 0; k < nTrain; ++k) inTrainPartition[shuffled[k]] = true;
  } else {
    const auto& rows = std::get<ExplicitSplit>(spec).trainRows;
    std::set<std::size_t> seen;
    for (std::size_t r : rows) {
      if (r >= n) {
        throw ValidationError("explicit split names row " + std::to_string(r) + " but the dataset has " +
                              std::to_string(n) + " rows");
      }
      if (!seen.insert(r).second) {
        throw ValidationError("explicit split lists row " + std::to_string(r) + " twice");
      }
      inTrainPartition[r] = true;
    }
  }

  OccSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    const bool isTarget = dataset.labels[i] == targetClass;
    if (inTrainPartition[i]) {
      (isTarget ? split.trainRows : split.trainOutlierRows).push_back(i);
    } else {
      split.testRows.push_back(i);
      split.testLabels.push_back(isTarget ? SampleLabel::Target : SampleLabel::Outlier);
    }
  }
  if (split.trainRows.empty()) {
    throw ValidationError("the train partition contains no rows of target class " +
                          std::to_string(targetClass));
  }
  split.trainTargets = selectRows(dataset.features, split.trainRows);
  split.testFeatures = selectRows(dataset.features, split.testRows);
  split.trainOutliers = selectRows(dataset.features, split.trainOutlierRows);
  split.normalizer = Normalizer::fit(split.trainTargets);
  return split;
}

OccSplit normalize(const OccSplit& split) {
  OccSplit out = split;
  out.normalizer = Normalizer::fit(split.trainTargets);
  out.trainTargets = out.normalizer.apply(split.trainTargets);
  out.testFeatures = out.normalizer.apply(split.testFeatures);
  out.trainOutliers = out.normalizer.apply(split.trainOutliers);
  out.normalized = true;
  return out;
}

Dataset synthGaussianRing(std::uint64_t seed, std::size_t nTargets, std::size_t nOutliers,
                          std::size_t dim, double ringRadius) {
  if (dim < 2) throw ValidationError("synthGaussianRing: dim must be >= 2");
  if (!(ringRadius > 0.0)) throw ValidationError("synthGaussianRing: ring radius must be > 0");
  Rng rng(seed);
  Dataset ds;
  ds.name = "gaussian_ring";
  ds.features = Matrix(nTargets + nOutliers, dim);
  for (std::size_t i = 0; i < nTargets; ++i) {
    for (double& v : ds.features.row(i)) v = rng.normal();
    ds.labels.push_back(0);
  }
  for (std::size_t i = nTargets; i < nTargets + nOutliers; ++i) {
    auto row = ds.features.row(i);
    double norm = 0.0;
    while (norm < 1e-12) {
      norm = 0.0;
      for (double& v : row) {
        v = rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
    }
    const double radius = ringRadius * rng.uniform(0.95, 1.05);
    for (double& v : row) v *= radius / norm;
    ds.labels.push_back(1);
  }
  return ds;
}

}  // namespace occ
