#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kgcl/graph.hpp"
#include "kgcl/tensor.hpp"

namespace kgcl {

struct SkipGramOptions {
  std::size_t dim = 128;
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 80;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 1;
  double learning_rate = 0.025;
};

using Walk = std::vector<EntityId>;

/// `walks_per_node` uniform undirected walks from every entity, ordered by
/// (round, entity). Each walk draws from its own derived seed, so both
/// variants return identical corpora.
std::vector<Walk> generate_walks(const KnowledgeGraph& graph, std::size_t walks_per_node,
                                 std::size_t walk_length, std::uint64_t seed);
std::vector<Walk> generate_walks_parallel(const KnowledgeGraph& graph, std::size_t walks_per_node,
                                          std::size_t walk_length, std::uint64_t seed);

/// DeepWalk-style structure embeddings: skip-gram with negative sampling over
/// uniform random walks. The SGD pass is sequential, so the table is a pure
/// function of (graph, options, seed). Zero epochs returns the initial table.
Tensor pretrain_structure_embeddings(const KnowledgeGraph& graph, const SkipGramOptions& options,
                                     std::uint64_t seed);

}  // namespace kgcl
