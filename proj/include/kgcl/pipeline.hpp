#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "kgcl/config.hpp"
#include "kgcl/encoders.hpp"
#include "kgcl/graph.hpp"
#include "kgcl/metrics.hpp"
#include "kgcl/schema.hpp"
#include "kgcl/skipgram.hpp"
#include "kgcl/training.hpp"

namespace kgcl {

/// A typed graph with its train/valid/test split. `train` is the graph every
/// model component sees; valid/test positives are held out of it.
struct Dataset {
  std::shared_ptr<Vocabulary> vocab;
  KnowledgeGraph full;
  EdgeSplit split;
  KnowledgeGraph train;
};

inline constexpr std::array<double, 3> kDefaultSplit = {0.8, 0.1, 0.1};

/// Random split of one triple file.
Dataset load_dataset(const std::filesystem::path& triples, const std::filesystem::path& types,
                     std::array<double, 3> ratios, std::uint64_t seed);
/// Predefined train/valid/test files; eval negatives are drawn against the
/// union of all three.
Dataset load_dataset_split(const std::filesystem::path& train, const std::filesystem::path& valid,
                           const std::filesystem::path& test, const std::filesystem::path& types,
                           std::uint64_t seed);
Dataset make_dataset(std::shared_ptr<Vocabulary> vocab, std::vector<Triple> triples, const EntityTypeMap& types,
                     std::array<double, 3> ratios, std::uint64_t seed);

struct SyntheticOptions {
  std::size_t entities = 200;
  std::size_t types = 4;
  std::size_t relations = 6;
  std::size_t communities = 8;
  std::size_t triples = 1500;
  /// Probability that an edge stays inside the head's community.
  double p_in = 0.95;
};

/// Planted-schema graph: entity i has type i mod T and community
/// (i / T) mod K. Relation r only links its planted (head type, tail type)
/// pair, so the typed-triple schema has exactly `relations` members.
struct SyntheticGraph {
  std::shared_ptr<Vocabulary> vocab;
  std::vector<Triple> triples;
  EntityTypeMap types;
  std::vector<TypedTriple> planted;
  std::vector<std::size_t> community;
};

SyntheticGraph make_synthetic(const SyntheticOptions& options, std::uint64_t seed);
void write_synthetic(const SyntheticGraph& g, const std::filesystem::path& triples_path,
                     const std::filesystem::path& types_path);

SkipGramOptions skipgram_options(const TrainConfig& config);

struct RunResult {
  SchemaTensor schema;
  ModelParams params;
  PretrainStats pretrain;
  FinetuneStats finetune;
  EvalReport valid;
  EvalReport test;
  double seconds = 0.0;
};

/// Schema -> structure view (trained, or `structure` when given) ->
/// contrastive pre-training (unless disabled) -> fine-tuning -> evaluation.
RunResult run_all(const Dataset& data, const TrainConfig& config,
                  const std::optional<Tensor>& structure = std::nullopt);

}  // namespace kgcl
