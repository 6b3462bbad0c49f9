#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "occ/data.hpp"
#include "occ/metrics.hpp"
#include "occ/trainer.hpp"

namespace occ::cli {

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitUser = 2 };

/// Dataset and normalized split described by the [data] section.
struct PreparedData {
  Dataset dataset;
  ClassId targetClass = 0;
  OccSplit split;
};

/// Loads or synthesizes the dataset, resolves the target class (first row's
/// class when unset) and builds the normalized split.
PreparedData prepareData(const DataSpec& spec);

/// Reads whitespace or comma separated row indices; '#' starts a comment.
std::vector<std::size_t> readSplitFile(const std::filesystem::path& path);

nlohmann::ordered_json reportToJson(const EvaluationReport& report);

/// Runs the `occ` command line. `args` excludes the program name. Errors are
/// reported as one `error: kind=<k> message=<m>` line on `err`.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace occ::cli
