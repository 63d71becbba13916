#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "kgcl/config.hpp"
#include "kgcl/graph.hpp"
#include "kgcl/rng.hpp"
#include "kgcl/schema.hpp"
#include "kgcl/subgraph.hpp"

namespace kgcl {

/// One encoded anchor of a pre-training batch.
struct AnchorRecord {
  EntityId entity = 0;
  SchemaKey key;
  TypeSet types;
  /// P_s, in subgraph triple order; the anchor itself never appears.
  std::vector<EntityId> positives;
  /// Context-view embedding of each positive, aligned with `positives`.
  std::vector<std::vector<double>> positive_embeddings;
  std::vector<double> embedding;
  /// All nodes of the anchor's context subgraph (anchor first).
  std::vector<EntityId> context;
  /// Index of the training batch the record was produced in.
  std::size_t batch_index = 0;
};

using RecordBatch = std::vector<AnchorRecord>;

/// FIFO of the last `capacity` batches. Records are value snapshots, so queued
/// embeddings keep the parameters they were computed with.
class PreBatchQueue {
 public:
  explicit PreBatchQueue(std::size_t capacity = 2) : capacity_(capacity) {}

  void push(RecordBatch batch);
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return batches_.size(); }
  bool empty() const noexcept { return batches_.empty(); }
  /// age 1 is the most recently pushed batch.
  const RecordBatch& at_age(std::size_t age) const { return batches_.at(batches_.size() - age); }

 private:
  std::size_t capacity_;
  std::deque<RecordBatch> batches_;
};

inline void push_prebatch(PreBatchQueue& queue, RecordBatch batch) { queue.push(std::move(batch)); }

/// Where a negative sample's embedding lives: age 0 is the current batch,
/// age a >= 1 is queue.at_age(a).
struct SampleRef {
  std::size_t age = 0;
  std::size_t record = 0;
  std::size_t positive = 0;
  EntityId entity = 0;

  bool operator==(const SampleRef&) const = default;
};

/// Positives of an anchor: tails of subgraph triples headed by `s`, excluding `s`.
std::vector<EntityId> positives(const ContextSubgraph& subgraph, EntityId s);

bool types_match(const TypeSet& a, const TypeSet& b, TypeMatch mode);

/// Positives of other anchors with the same schema key and matching types,
/// current batch first (batch order) then queued batches newest first. Members
/// of the anchor's own P_s are dropped. At most `cap` samples.
std::vector<SampleRef> intra_schema_negatives(std::span<const AnchorRecord> batch,
                                              const PreBatchQueue& queue, std::size_t anchor,
                                              std::size_t cap, TypeMatch mode = TypeMatch::Strict);

/// Context entities of batch anchors whose schema key differs, excluding the
/// anchor and its positives. Duplicates are kept. At most `cap` samples.
std::vector<EntityId> inter_schema_negatives(std::span<const AnchorRecord> batch, std::size_t anchor,
                                             std::size_t cap);

/// Entities with a type matching `tail_types` and no triple (s, *, v);
/// uniformly subsampled to `cap` when larger. Ascending id order.
std::vector<EntityId> relation_level_negatives(const KnowledgeGraph& graph, EntityId s,
                                               const TypeSet& tail_types, std::size_t cap, Rng& rng,
                                               TypeMatch mode = TypeMatch::Strict);

enum class CorruptSide { Head, Tail, Either };

/// Replaces one endpoint with a uniformly drawn entity sharing at least one
/// type with it, such that the result is not a graph triple. The other side is
/// tried when the first has no candidate; nullopt when neither has one.
std::optional<Triple> corrupt_triple(const KnowledgeGraph& graph, const Triple& triple,
                                     CorruptSide side, Rng& rng);

}  // namespace kgcl
