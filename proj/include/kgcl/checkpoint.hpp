#pragma once

#include <filesystem>
#include <string>

#include "kgcl/config.hpp"
#include "kgcl/encoders.hpp"
#include "kgcl/training.hpp"

namespace kgcl {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to resume: config, parameters, optimizer moments, step
/// counters and the pre-batch queue of each phase.
struct Checkpoint {
  TrainConfig config;
  ModelParams params;
  PhaseState pretrain;
  PhaseState finetune;
  /// Last completed stage: "init", "structure", "pretrain" or "finetune".
  std::string stage = "init";
};

/// JSON text; doubles are written with round-trip precision.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Throws ValidationError on a version mismatch or malformed content and
/// std::runtime_error when the file cannot be read.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kgcl
