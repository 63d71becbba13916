#include "kgcl/sampling.hpp"

#include <algorithm>

namespace kgcl {

void PreBatchQueue::push(RecordBatch batch) {
  if (capacity_ == 0) return;
  batches_.push_back(std::move(batch));
  while (batches_.size() > capacity_) batches_.pop_front();
}

std::vector<EntityId> positives(const ContextSubgraph& subgraph, EntityId s) {
  std::vector<EntityId> out;
  for (const auto& t : subgraph.triples)
    if (t.head == s && t.tail != s && std::find(out.begin(), out.end(), t.tail) == out.end())
      out.push_back(t.tail);
  return out;
}

bool types_match(const TypeSet& a, const TypeSet& b, TypeMatch mode) {
  if (mode == TypeMatch::Strict) return a == b;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j)
      ++i;
    else
      ++j;
  }
  return false;
}

namespace {

bool is_positive(const AnchorRecord& r, EntityId e) {
  return std::find(r.positives.begin(), r.positives.end(), e) != r.positives.end();
}

}  // namespace

std::vector<SampleRef> intra_schema_negatives(std::span<const AnchorRecord> batch,
                                              const PreBatchQueue& queue, std::size_t anchor,
                                              std::size_t cap, TypeMatch mode) {
  const auto& s = batch[anchor];
  std::vector<SampleRef> out;
  auto scan = [&](std::span<const AnchorRecord> records, std::size_t age) {
    for (std::size_t i = 0; i < records.size() && out.size() < cap; ++i) {
      if (age == 0 && i == anchor) continue;
      const auto& r = records[i];
      if (r.key != s.key || !types_match(r.types, s.types, mode)) continue;
      for (std::size_t p = 0; p < r.positives.size() && out.size() < cap; ++p)
        if (!is_positive(s, r.positives[p])) out.push_back({age, i, p, r.positives[p]});
    }
  };
  scan(batch, 0);
  for (std::size_t age = 1; age <= queue.size() && out.size() < cap; ++age) scan(queue.at_age(age), age);
  return out;
}

std::vector<EntityId> inter_schema_negatives(std::span<const AnchorRecord> batch, std::size_t anchor,
                                             std::size_t cap) {
  const auto& s = batch[anchor];
  std::vector<EntityId> out;
  for (std::size_t i = 0; i < batch.size() && out.size() < cap; ++i) {
    if (i == anchor || batch[i].key == s.key) continue;
    for (EntityId e : batch[i].context) {
      if (out.size() >= cap) break;
      if (e == s.entity || is_positive(s, e)) continue;
      out.push_back(e);
    }
  }
  return out;
}

std::vector<EntityId> relation_level_negatives(const KnowledgeGraph& graph, EntityId s,
                                               const TypeSet& tail_types, std::size_t cap, Rng& rng,
                                               TypeMatch mode) {
  std::vector<EntityId> linked_out;
  for (const auto& e : graph.adjacency(s))
    if (e.outgoing) linked_out.push_back(e.neighbor);
  std::sort(linked_out.begin(), linked_out.end());

  std::vector<EntityId> pool;
  std::vector<EntityId> seen;
  for (TypeId t : tail_types)
    for (EntityId v : graph.entities_of_type(t)) seen.push_back(v);
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  for (EntityId v : seen) {
    if (std::binary_search(linked_out.begin(), linked_out.end(), v)) continue;
    if (!types_match(graph.types(v), tail_types, mode)) continue;
    pool.push_back(v);
  }
  if (pool.size() > cap) {
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(cap);
    std::sort(pool.begin(), pool.end());
  }
  return pool;
}

namespace {

std::optional<Triple> corrupt_side(const KnowledgeGraph& graph, const Triple& t, bool head, Rng& rng) {
  const EntityId original = head ? t.head : t.tail;
  const auto& types = graph.types(original);
  auto make = [&](EntityId e) {
    Triple c = t;
    (head ? c.head : c.tail) = e;
    return c;
  };
  auto shared = [&](EntityId e) {
    std::size_t n = 0;
    for (TypeId ty : graph.types(e))
      if (std::binary_search(types.begin(), types.end(), ty)) ++n;
    return n;
  };

  std::size_t pool = 0;
  for (TypeId ty : types) pool += graph.entities_of_type(ty).size();
  if (pool == 0) return std::nullopt;

  // Rejection sampling over the concatenated per-type lists; accepting with
  // probability 1/multiplicity makes the draw uniform over distinct entities.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 32; ++attempt) {
    std::size_t k = uniform_index(rng, pool);
    EntityId e = 0;
    for (TypeId ty : types) {
      auto list = graph.entities_of_type(ty);
      if (k < list.size()) {
        e = list[k];
        break;
      }
      k -= list.size();
    }
    const auto mult = shared(e);
    if (mult > 1 && unit(rng) * static_cast<double>(mult) >= 1.0) continue;
    if (e == original || graph.contains(make(e))) continue;
    return make(e);
  }

  std::vector<EntityId> candidates;
  for (TypeId ty : types)
    for (EntityId e : graph.entities_of_type(ty))
      if (e != original && !graph.contains(make(e))) candidates.push_back(e);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty()) return std::nullopt;
  return make(candidates[uniform_index(rng, candidates.size())]);
}

}  // namespace

std::optional<Triple> corrupt_triple(const KnowledgeGraph& graph, const Triple& triple,
                                     CorruptSide side, Rng& rng) {
  bool head_first = side == CorruptSide::Head;
  if (side == CorruptSide::Either) head_first = uniform_index(rng, 2) == 0;
  if (auto c = corrupt_side(graph, triple, head_first, rng)) return c;
  return corrupt_side(graph, triple, !head_first, rng);
}

}  // namespace kgcl
