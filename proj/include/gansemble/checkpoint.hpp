#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "gansemble/adam.hpp"
#include "gansemble/model.hpp"

namespace gansemble {

// Binary model container: named parameter and buffer tensors, optimizer
// moments, RNG seed and step count. Byte layout is documented in
// docs/checkpoint_format.md; save followed by load restores every double
// bit-exactly.
struct CheckpointMeta {
  std::uint64_t rng_seed = 0;
  std::uint64_t step_count = 0;
};

void save_checkpoint(const std::filesystem::path& path, MlpModel& model,
                     const AdamState* optimizer, const CheckpointMeta& meta);

// The model must already have the target architecture; entries are matched
// by name and shape. Returns the stored meta. If `optimizer` is non-null the
// checkpoint must contain moment tensors for every parameter.
CheckpointMeta load_checkpoint(const std::filesystem::path& path,
                               MlpModel& model, AdamState* optimizer);

}  // namespace gansemble
