#include "kgcl/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <set>

#include "kgcl/errors.hpp"
#include "kgcl/rng.hpp"

namespace kgcl {

Dataset make_dataset(std::shared_ptr<Vocabulary> vocab, std::vector<Triple> triples, const EntityTypeMap& types,
                     std::array<double, 3> ratios, std::uint64_t seed) {
  Dataset d;
  d.vocab = vocab;
  d.full = KnowledgeGraph::build(std::move(triples), types, vocab);
  d.split = split_edges(d.full, ratios, seed);
  d.train = d.full.with_triples(d.split.train);
  return d;
}

Dataset load_dataset(const std::filesystem::path& triples, const std::filesystem::path& types,
                     std::array<double, 3> ratios, std::uint64_t seed) {
  auto vocab = std::make_shared<Vocabulary>();
  auto t = load_triples(triples, *vocab);
  auto ty = load_entity_types(types, *vocab);
  return make_dataset(vocab, std::move(t), ty, ratios, seed);
}

Dataset load_dataset_split(const std::filesystem::path& train, const std::filesystem::path& valid,
                           const std::filesystem::path& test, const std::filesystem::path& types,
                           std::uint64_t seed) {
  auto vocab = std::make_shared<Vocabulary>();
  auto tr = load_triples(train, *vocab);
  auto va = load_triples(valid, *vocab);
  auto te = load_triples(test, *vocab);
  auto ty = load_entity_types(types, *vocab);
  std::vector<Triple> all = tr;
  all.insert(all.end(), va.begin(), va.end());
  all.insert(all.end(), te.begin(), te.end());
  Dataset d;
  d.vocab = vocab;
  d.full = KnowledgeGraph::build(std::move(all), ty, vocab);
  d.split.train = std::move(tr);
  auto negatives = [&](const std::vector<Triple>& pos, std::vector<Triple>& kept, std::vector<Triple>& neg,
                       std::uint64_t tag) {
    for (std::size_t i = 0; i < pos.size(); ++i) {
      Rng rng(derive_seed(seed, {tag, i}));
      if (auto c = corrupt_triple(d.full, pos[i], CorruptSide::Either, rng)) {
        kept.push_back(pos[i]);
        neg.push_back(*c);
      } else {
        ++d.split.resampled;
      }
    }
  };
  negatives(va, d.split.valid, d.split.valid_negatives, 0xc0de1);
  negatives(te, d.split.test, d.split.test_negatives, 0xc0de2);
  d.train = d.full.with_triples(d.split.train);
  return d;
}

SyntheticGraph make_synthetic(const SyntheticOptions& o, std::uint64_t seed) {
  if (o.types == 0 || o.relations == 0 || o.communities == 0 || o.entities < o.types * o.communities)
    throw ConfigError("synthetic graph needs at least one entity per (type, community)");
  SyntheticGraph g;
  g.vocab = std::make_shared<Vocabulary>();
  auto& v = *g.vocab;
  std::vector<TypeId> type_of(o.entities);
  std::vector<std::vector<std::vector<EntityId>>> members(o.types, std::vector<std::vector<EntityId>>(o.communities));
  for (std::size_t t = 0; t < o.types; ++t) v.types.intern("T" + std::to_string(t));
  for (std::size_t i = 0; i < o.entities; ++i) {
    const auto e = v.entities.intern("e" + std::to_string(i));
    type_of[i] = static_cast<TypeId>(i % o.types);
    g.community.push_back((i / o.types) % o.communities);
    g.types["e" + std::to_string(i)] = {type_of[i]};
    members[type_of[i]][g.community.back()].push_back(e);
  }
  // Relation r links type r mod T to type (r + 1 + r / T) mod T: a cycle
  // through the types, then chords.
  for (std::size_t r = 0; r < o.relations; ++r) {
    v.relations.intern("r" + std::to_string(r));
    const auto head = static_cast<TypeId>(r % o.types);
    auto tail = static_cast<TypeId>((r + 1 + r / o.types) % o.types);
    g.planted.push_back({head, static_cast<RelationId>(r), tail});
  }

  Rng rng(derive_seed(seed, {0x5e7}));
  std::set<Triple> seen;
  std::size_t attempts = 0;
  const std::size_t max_attempts = o.triples * 1000;
  while (seen.size() < o.triples && attempts++ < max_attempts) {
    const auto& p = g.planted[uniform_index(rng, g.planted.size())];
    const auto c = uniform_index(rng, o.communities);
    const auto& heads = members[p.head][c];
    const EntityId h = heads[uniform_index(rng, heads.size())];
    std::size_t tc = c;
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= o.p_in) tc = uniform_index(rng, o.communities);
    const auto& tails = members[p.tail][tc];
    const EntityId t = tails[uniform_index(rng, tails.size())];
    if (h == t) continue;
    if (seen.insert({h, p.relation, t}).second) g.triples.push_back({h, p.relation, t});
  }
  return g;
}

void write_synthetic(const SyntheticGraph& g, const std::filesystem::path& triples_path,
                     const std::filesystem::path& types_path) {
  write_triples(triples_path, g.triples, *g.vocab);
  std::ofstream out(types_path);
  if (!out) throw std::runtime_error("cannot write " + types_path.string());
  for (std::size_t e = 0; e < g.vocab->entities.size(); ++e) {
    const auto& name = g.vocab->entities.name(static_cast<std::uint32_t>(e));
    for (TypeId t : g.types.at(name)) out << name << '\t' << g.vocab->types.name(t) << '\n';
  }
}

SkipGramOptions skipgram_options(const TrainConfig& c) {
  SkipGramOptions o;
  o.dim = c.embedding_dim;
  o.walks_per_node = c.structure_walks_per_node;
  o.walk_length = c.structure_walk_length;
  o.window = c.structure_window;
  o.negatives = c.structure_negatives;
  o.epochs = c.structure_epochs;
  o.learning_rate = c.structure_learning_rate;
  return o;
}

RunResult run_all(const Dataset& data, const TrainConfig& config, const std::optional<Tensor>& structure) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  r.schema = build_schema(count_typed_triples_parallel(data.train), config.schema_alpha);
  r.params = ModelParams::init(data.train.num_entities(), data.train.num_relations(), config, config.seed);
  if (structure) {
    if (structure->rows() != r.params.entity.value.rows() || structure->cols() != r.params.entity.value.cols())
      throw ValidationError("structure embeddings do not match the entity table shape");
    r.params.entity.value = *structure;
  } else {
    r.params.entity.value =
        pretrain_structure_embeddings(data.train, skipgram_options(config), derive_seed(config.seed, {0x57c}));
  }
  if (!config.disable_pretrain) r.pretrain = pretrain(data.train, r.schema, r.params, config);
  r.finetune = finetune(data.train, r.params, config);
  if (!data.split.valid.empty())
    r.valid = evaluate(r.params, data.train, data.split.valid, data.split.valid_negatives, config);
  if (!data.split.test.empty())
    r.test = evaluate(r.params, data.train, data.split.test, data.split.test_negatives, config);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace kgcl
