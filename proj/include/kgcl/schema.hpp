#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kgcl/graph.hpp"

namespace kgcl {

struct ContextSubgraph;

/// (head_type, relation, tail_type)
struct TypedTriple {
  TypeId head = 0;
  RelationId relation = 0;
  TypeId tail = 0;

  auto operator<=>(const TypedTriple&) const = default;
};

using FrequencyMap = std::map<TypedTriple, std::size_t>;

/// Boolean (head_type, relation, tail_type) tensor, stored sparsely, together
/// with the counts it was thresholded from.
struct SchemaTensor {
  std::set<TypedTriple> membership;
  FrequencyMap frequency;
  std::size_t alpha = 1;

  bool contains(const TypedTriple& t) const { return membership.contains(t); }
  std::size_t size() const noexcept { return membership.size(); }
};

/// Sorted, duplicate-free subset of a schema's membership.
struct ContextSchema {
  std::vector<TypedTriple> typed_triples;
};

/// Canonical byte digest of a context schema; equal sets give equal keys.
using SchemaKey = std::string;

/// Every (t_s, t_o) in types(s) x types(o) contributes one count to (t_s, r, t_o).
FrequencyMap count_typed_triples(const KnowledgeGraph& graph);

/// Same counts, with triples sharded across OpenMP threads and merged.
FrequencyMap count_typed_triples_parallel(const KnowledgeGraph& graph);

/// Keeps typed triples whose frequency reaches `alpha` (alpha >= 1).
SchemaTensor build_schema(const FrequencyMap& frequency, std::size_t alpha);

ContextSchema context_schema(const KnowledgeGraph& graph, const SchemaTensor& schema,
                             const ContextSubgraph& subgraph);

SchemaKey schema_key(const ContextSchema& schema);

/// Sorted by (head type, relation, tail type) names:
/// "head_type\trelation\ttail_type\tcount".
void write_schema(const std::filesystem::path& path, const SchemaTensor& schema,
                  const Vocabulary& vocab);

/// Reads a file produced by write_schema; type and relation names are interned
/// into `vocab`. The threshold is recovered as the smallest listed count.
SchemaTensor read_schema(const std::filesystem::path& path, Vocabulary& vocab);

}  // namespace kgcl
