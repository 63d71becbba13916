#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgcl {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using TypeId = std::uint32_t;

/// Sorted, duplicate-free list of type ids.
using TypeSet = std::vector<TypeId>;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  auto operator<=>(const Triple&) const = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t k = (std::uint64_t{t.head} << 32) ^ (std::uint64_t{t.relation} << 16) ^ t.tail;
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    return static_cast<std::size_t>(k);
  }
};

/// Maps string identifiers to dense ids in first-seen order.
class Interner {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

struct Vocabulary {
  Interner entities;
  Interner relations;
  Interner types;
};

/// Entity name -> all of its listed types. Keyed by name so that the type file
/// may cover entities that never occur in any triple.
using EntityTypeMap = std::unordered_map<std::string, TypeSet>;

/// Reads "head\trelation\ttail" lines, interning names into `vocab`.
/// Blank lines are skipped. Throws ParseError on a wrong field count.
std::vector<Triple> load_triples(const std::filesystem::path& path, Vocabulary& vocab);

/// Reads "entity\ttype" lines; repeated entities accumulate types. Entities
/// not seen before are interned too, so they become isolated graph nodes.
EntityTypeMap load_entity_types(const std::filesystem::path& path, Vocabulary& vocab);

void write_triples(const std::filesystem::path& path, std::span<const Triple> triples,
                   const Vocabulary& vocab);

struct AdjacentEdge {
  RelationId relation;
  EntityId neighbor;
  bool outgoing;
};

/// Immutable typed multi-relational graph. All entities of the vocabulary get
/// an id slot, so graphs built over a subset of triples (e.g. a training
/// split) stay aligned with the full id space.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  /// Throws ValidationError naming every triple entity that has no type.
  static KnowledgeGraph build(std::vector<Triple> triples, const EntityTypeMap& types,
                              std::shared_ptr<const Vocabulary> vocab);

  /// Same vocabulary and typing, different triple set.
  KnowledgeGraph with_triples(std::vector<Triple> triples) const;

  std::size_t num_entities() const noexcept { return entity_types_.size(); }
  std::size_t num_relations() const noexcept { return vocab_->relations.size(); }
  std::size_t num_types() const noexcept { return vocab_->types.size(); }

  const std::vector<Triple>& triples() const noexcept { return triples_; }
  const TypeSet& types(EntityId e) const { return entity_types_.at(e); }
  std::span<const AdjacentEdge> adjacency(EntityId e) const { return adjacency_.at(e); }
  /// Distinct undirected neighbours in ascending id order (self excluded).
  std::span<const EntityId> neighbors(EntityId e) const { return neighbors_.at(e); }
  std::span<const EntityId> entities_of_type(TypeId t) const { return by_type_.at(t); }

  bool contains(const Triple& t) const { return triple_set_.contains(t); }
  /// True when some triple links u and v in either direction.
  bool linked(EntityId u, EntityId v) const;

  const Vocabulary& vocab() const noexcept { return *vocab_; }
  std::shared_ptr<const Vocabulary> vocab_ptr() const noexcept { return vocab_; }
  const std::string& entity_name(EntityId e) const { return vocab_->entities.name(e); }

 private:
  void index();

  std::shared_ptr<const Vocabulary> vocab_;
  std::vector<Triple> triples_;
  std::vector<TypeSet> entity_types_;
  std::vector<std::vector<AdjacentEdge>> adjacency_;
  std::vector<std::vector<EntityId>> neighbors_;
  std::vector<std::vector<EntityId>> by_type_;
  std::unordered_set<Triple, TripleHash> triple_set_;
};

struct EdgeSplit {
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  /// Paired 1:1 with `valid` / `test`.
  std::vector<Triple> valid_negatives;
  std::vector<Triple> test_negatives;
  /// Eval positives that admitted no corruption and were swapped into train.
  std::size_t resampled = 0;
};

/// Shuffles triples under `seed`, cuts them by `ratios` and draws one
/// type-preserving corruption per valid/test positive.
EdgeSplit split_edges(const KnowledgeGraph& graph, std::array<double, 3> ratios,
                      std::uint64_t seed);

/// train.tsv, valid.tsv, test.tsv and negatives.tsv (valid negatives, then
/// test negatives, each aligned with its positives) under `dir`.
void write_split(const std::filesystem::path& dir, const EdgeSplit& split, const Vocabulary& vocab);

}  // namespace kgcl
