#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "kgcl/graph.hpp"

namespace kgcl {

/// Context of an anchor entity (or of an ordered entity pair).
///
/// `nodes` are distinct, anchor first; `triples` is the set of graph triples
/// with both endpoints in `nodes`, in adjacency order.
struct ContextSubgraph {
  EntityId anchor = 0;
  std::optional<EntityId> second;
  std::vector<EntityId> nodes;
  std::vector<Triple> triples;
  std::size_t max_nodes = 0;

  /// Position of `e` in `nodes`, if present.
  std::optional<std::size_t> index_of(EntityId e) const;
};

/// Induced triple set of `nodes` in `graph`.
std::vector<Triple> induced_triples(const KnowledgeGraph& graph, const std::vector<EntityId>& nodes);

/// First `max_nodes` distinct entities met by a uniform walk over undirected
/// neighbours, starting at `anchor`, for at most `walk_length` steps.
ContextSubgraph random_walk_context(const KnowledgeGraph& graph, EntityId anchor,
                                    std::size_t max_nodes, std::size_t walk_length,
                                    std::uint64_t seed);

/// Nodes of one BFS shortest undirected path from `s` to `o`, expanding
/// neighbours in ascending id order. Paths longer than `max_nodes` keep their
/// prefix and `o`. With `mask_direct` set, edges joining s and o directly are
/// ignored during the search (they are still part of the induced triples).
/// Unreachable pairs yield the two-node context {s, o}.
ContextSubgraph shortest_path_context(const KnowledgeGraph& graph, EntityId s, EntityId o,
                                      std::size_t max_nodes, bool mask_direct = false);

/// The contained triple set T_c.
inline const std::vector<Triple>& subgraph_triples(const ContextSubgraph& g) { return g.triples; }

}  // namespace kgcl
