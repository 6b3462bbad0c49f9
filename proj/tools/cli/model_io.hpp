#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "occ/data.hpp"
#include "occ/trainer.hpp"

namespace occ::cli {

inline constexpr const char* kModelMagic = "occ-barrier-model";
inline constexpr int kModelVersion = 1;

/// A trained model plus the normalizer fitted on its training targets.
struct SavedModel {
  TrainedModel model;
  Normalizer normalizer;
};

/// Text layout, one record per line, numbers as %.17g:
///   occ-barrier-model 1
///   # <comment lines>
///   loss <KIND>
///   activation <name> <slope>
///   layers <L>
///   layer <fanIn> <fanOut>, then fanIn weight rows, then one bias row
///   center <k> <values>
///   radius <r>
///   threshold <eta>
///   normalizer <d> <min max pairs>
///   end
void saveModel(const SavedModel& saved, const std::filesystem::path& path,
               const std::vector<std::string>& comments = {});
SavedModel loadModel(const std::filesystem::path& path);

}  // namespace occ::cli
