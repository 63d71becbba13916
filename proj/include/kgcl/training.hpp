#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kgcl/adam.hpp"
#include "kgcl/config.hpp"
#include "kgcl/encoders.hpp"
#include "kgcl/graph.hpp"
#include "kgcl/sampling.hpp"
#include "kgcl/schema.hpp"

namespace kgcl {

/// Optimizer moments, completed epochs and (for pre-training) the pre-batch
/// queue: everything needed to continue a phase where it stopped.
struct PhaseState {
  AdamState adam;
  std::size_t epochs_done = 0;
  std::size_t batches_done = 0;
  PreBatchQueue queue{0};
};

struct PretrainStats {
  std::vector<double> epoch_loss;
  std::size_t anchors = 0;
  /// Anchors whose context held no positive; excluded from every loss.
  std::size_t skipped_no_positive = 0;
  /// Anchors whose contextual term had no negative (and so was exactly 0).
  std::size_t empty_contextual_negatives = 0;
  std::size_t empty_global_negatives = 0;
  /// Batches in which every anchor was skipped.
  std::size_t empty_batches = 0;
};

struct FinetuneStats {
  std::vector<double> epoch_loss;
  /// Positive plus negative scores entering the loss.
  std::size_t scored = 0;
  /// Positives for which no type-preserving corruption exists.
  std::size_t skipped_no_corruption = 0;
};

/// Contrastive pre-training on `graph` (normally the training split).
/// Continues from `state` and runs until `config.epoch_pretrain` epochs are done.
PretrainStats pretrain(const KnowledgeGraph& graph, const SchemaTensor& schema, ModelParams& params,
                       const TrainConfig& config, PhaseState& state);
PretrainStats pretrain(const KnowledgeGraph& graph, const SchemaTensor& schema, ModelParams& params,
                       const TrainConfig& config);

/// Triple-level fine-tuning over every triple of `graph`, each paired with
/// `config.finetune_negatives` type-preserving corruptions.
FinetuneStats finetune(const KnowledgeGraph& graph, ModelParams& params, const TrainConfig& config,
                       PhaseState& state);
FinetuneStats finetune(const KnowledgeGraph& graph, ModelParams& params, const TrainConfig& config);

/// Shortest-path context of (s, o) in `graph`, composes the head with z_r,
/// encodes, and returns sigmoid(c_s^r . c_o) as a 1x1 var.
Var score_triple_var(const BoundModel& model, const KnowledgeGraph& graph, const Triple& triple,
                     const TrainConfig& config);

/// c_s^r . c_o before the sigmoid; the fine-tuning objective works on this.
Var triple_logit_var(const BoundModel& model, const KnowledgeGraph& graph, const Triple& triple,
                     const TrainConfig& config);

/// Forward-only score against frozen parameters.
double score_triple(const ModelParams& params, const KnowledgeGraph& graph, const Triple& triple,
                    const TrainConfig& config);

/// Scores for a list of triples; the serial loop is the reference for the
/// OpenMP variant, which fans triples out over threads with one tape each.
std::vector<double> score_triples_serial(const ModelParams& params, const KnowledgeGraph& graph,
                                         std::span<const Triple> triples, const TrainConfig& config);
std::vector<double> score_triples(const ModelParams& params, const KnowledgeGraph& graph,
                                  std::span<const Triple> triples, const TrainConfig& config);

/// Context-view embedding of `entity` under the pre-training context
/// generator (random walk with a seed derived from `seed` and the entity).
std::vector<double> context_embedding(const ModelParams& params, const KnowledgeGraph& graph,
                                      EntityId entity, const TrainConfig& config, std::uint64_t seed);

/// Encoding of single-node contexts, one column per entity, computed as one
/// batched pass. A one-node attention matrix is exactly [[1]], so column j
/// equals encode_context on the context {entities[j]}. Result is n x d.
Var encode_isolated(const BoundModel& model, std::span<const EntityId> entities);

}  // namespace kgcl
