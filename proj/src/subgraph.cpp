#include "kgcl/subgraph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_map>

#include "kgcl/errors.hpp"
#include "kgcl/rng.hpp"

namespace kgcl {

std::optional<std::size_t> ContextSubgraph::index_of(EntityId e) const {
  auto it = std::find(nodes.begin(), nodes.end(), e);
  if (it == nodes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - nodes.begin());
}

std::vector<Triple> induced_triples(const KnowledgeGraph& graph, const std::vector<EntityId>& nodes) {
  std::vector<Triple> out;
  for (EntityId u : nodes)
    for (const auto& e : graph.adjacency(u))
      if (e.outgoing && std::find(nodes.begin(), nodes.end(), e.neighbor) != nodes.end())
        out.push_back({u, e.relation, e.neighbor});
  return out;
}

ContextSubgraph random_walk_context(const KnowledgeGraph& graph, EntityId anchor,
                                    std::size_t max_nodes, std::size_t walk_length,
                                    std::uint64_t seed) {
  if (anchor >= graph.num_entities()) throw ValidationError("walk anchor out of range");
  if (max_nodes < 2) throw ConfigError("max_nodes must be >= 2");
  ContextSubgraph g;
  g.anchor = anchor;
  g.max_nodes = max_nodes;
  g.nodes.push_back(anchor);

  Rng rng(seed);
  EntityId cur = anchor;
  for (std::size_t step = 0; step < walk_length && g.nodes.size() < max_nodes; ++step) {
    auto nb = graph.neighbors(cur);
    if (nb.empty()) break;
    cur = nb[uniform_index(rng, nb.size())];
    if (std::find(g.nodes.begin(), g.nodes.end(), cur) == g.nodes.end()) g.nodes.push_back(cur);
  }
  g.triples = induced_triples(graph, g.nodes);
  return g;
}

ContextSubgraph shortest_path_context(const KnowledgeGraph& graph, EntityId s, EntityId o,
                                      std::size_t max_nodes, bool mask_direct) {
  if (s == o) throw ValidationError("shortest_path_context requires distinct endpoints");
  if (max_nodes < 2) throw ConfigError("max_nodes must be >= 2");
  ContextSubgraph g;
  g.anchor = s;
  g.second = o;
  g.max_nodes = max_nodes;

  constexpr auto kUnseen = std::numeric_limits<EntityId>::max();
  std::unordered_map<EntityId, EntityId> parent{{s, s}};
  auto parent_of = [&parent](EntityId e) {
    auto it = parent.find(e);
    return it == parent.end() ? kUnseen : it->second;
  };

  std::deque<EntityId> frontier{s};
  bool found = false;
  while (!frontier.empty() && !found) {
    EntityId u = frontier.front();
    frontier.pop_front();
    for (EntityId v : graph.neighbors(u)) {
      if (mask_direct && ((u == s && v == o) || (u == o && v == s))) continue;
      if (parent_of(v) != kUnseen) continue;
      parent.emplace(v, u);
      if (v == o) {
        found = true;
        break;
      }
      frontier.push_back(v);
    }
  }

  if (!found) {
    g.nodes = {s, o};
  } else {
    std::vector<EntityId> path;
    for (EntityId cur = o; cur != s; cur = parent_of(cur)) path.push_back(cur);
    path.push_back(s);
    std::reverse(path.begin(), path.end());
    if (path.size() > max_nodes) {
      path.resize(max_nodes - 1);
      path.push_back(o);
    }
    g.nodes = std::move(path);
  }
  g.triples = induced_triples(graph, g.nodes);
  return g;
}

}  // namespace kgcl
