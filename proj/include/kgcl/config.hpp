#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace kgcl {

enum class Composition { Subtract, Multiply, Correlate };
enum class NegativeMode { Schema, Relation };
enum class TypeMatch { Strict, Overlap };

Composition parse_composition(std::string_view s);
NegativeMode parse_negative_mode(std::string_view s);
TypeMatch parse_type_match(std::string_view s);
std::string_view to_string(Composition c);
std::string_view to_string(NegativeMode m);
std::string_view to_string(TypeMatch m);

/// Every knob of the pipeline. Defaults follow the reference setup where one
/// exists (tau 0.8, 4 layers and heads, d = 128, caps of 512, two queued
/// batches, multiplicative composition, Adam at 1e-4 / 1e-3).
struct TrainConfig {
  // encoder shape
  std::size_t embedding_dim = 128;
  std::size_t projection_dim = 128;
  std::size_t layers = 4;
  std::size_t heads = 4;

  // contrastive pre-training
  double temperature = 0.8;
  double balancing_coefficient = 0.5;
  std::size_t max_intra_negatives = 512;
  std::size_t max_inter_negatives = 512;
  std::size_t queued_negative_batches = 2;
  double learning_rate_pretrain = 1e-4;
  std::size_t batch_size_pretrain = 1024;
  std::size_t epoch_pretrain = 10;
  NegativeMode negative_mode = NegativeMode::Schema;
  TypeMatch type_match = TypeMatch::Strict;
  bool schema_bucketing = true;
  bool freeze_structure = false;
  bool disable_contextual = false;
  bool disable_global = false;
  bool disable_pretrain = false;

  // contexts
  std::size_t context_subgraph_size = 6;
  std::size_t context_walk_length = 40;
  std::size_t schema_alpha = 1;

  // fine-tuning
  double learning_rate_finetune = 1e-3;
  std::size_t batch_size_finetune = 256;
  std::size_t epoch_finetune = 10;
  std::size_t finetune_negatives = 1;
  Composition composition = Composition::Multiply;
  bool compose_all_nodes = false;
  bool mask_target_edge = true;

  // structure-view skip-gram
  std::size_t structure_walks_per_node = 10;
  std::size_t structure_walk_length = 80;
  std::size_t structure_window = 5;
  std::size_t structure_negatives = 5;
  std::size_t structure_epochs = 1;
  double structure_learning_rate = 0.025;

  double threshold = 0.5;
  std::uint64_t seed = 0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Flat "key = value" lines; '#' starts a comment. Unknown keys are errors.
TrainConfig parse_config(std::string_view text, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {});
/// Inverse of parse_config, one key per line.
std::string format_config(const TrainConfig& config);

}  // namespace kgcl
