#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "occ/matrix.hpp"
#include "occ/metrics.hpp"

namespace occ {

using ClassId = std::int64_t;

struct Dataset {
  Matrix features;
  std::vector<ClassId> labels;
  std::string name;

  void validate() const;
};

/// Which CSV column holds the class label. Empty index means the last one.
struct LabelColumn {
  std::optional<std::size_t> index;

  static LabelColumn last() { return {}; }
  static LabelColumn at(std::size_t i) { return {i}; }
};

/// Comma-separated numeric rows. Blank lines and lines starting with '#' are
/// skipped; a first data line with any non-numeric cell is treated as a header.
Dataset loadCsv(const std::filesystem::path& path, LabelColumn labelColumn = LabelColumn::last());

/// Writes features then the label as the last column. `comments` become
/// leading '#' lines.
void writeCsv(const Dataset& dataset, const std::filesystem::path& path,
              const std::vector<std::string>& comments = {});

struct FeatureRange {
  double min = 0.0;
  double max = 0.0;
};

/// Per-feature affine map of the fitted range onto [-1, 1].
struct Normalizer {
  std::vector<FeatureRange> ranges;

  static Normalizer fit(const Matrix& data);
  /// Constant features map to 0; values outside the fitted range are clamped.
  Matrix apply(const Matrix& data) const;
};

/// Train on a random fraction of the target rows; everything else is tested.
struct FractionSplit {
  double trainFraction = 0.5;
  std::uint64_t seed = 0;
};

/// Explicit train partition by row index. Target rows of the partition are
/// trained on; its non-target rows are held aside as `trainOutliers`.
struct ExplicitSplit {
  std::vector<std::size_t> trainRows;
};

using SplitSpec = std::variant<FractionSplit, ExplicitSplit>;

struct OccSplit {
  Matrix trainTargets;
  Matrix testFeatures;
  std::vector<SampleLabel> testLabels;
  /// Non-target rows of an explicit train partition; never used for fitting.
  Matrix trainOutliers;
  Normalizer normalizer;
  bool normalized = false;

  std::vector<std::size_t> trainRows;
  std::vector<std::size_t> testRows;
  std::vector<std::size_t> trainOutlierRows;
};

OccSplit makeOccSplit(const Dataset& dataset, ClassId targetClass, const SplitSpec& spec);

/// Fits the normalizer on trainTargets and maps every partition with it.
OccSplit normalize(const OccSplit& split);

/// Targets ~ N(0, I); outliers on a sphere of `ringRadius` with +-5% radial
/// jitter. Labels: 0 target, 1 outlier; targets come first.
Dataset synthGaussianRing(std::uint64_t seed, std::size_t nTargets, std::size_t nOutliers,
                          std::size_t dim, double ringRadius);

}  // namespace occ
