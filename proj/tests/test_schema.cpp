#include <gtest/gtest.h>

#include <map>
#include <set>

#include "kgcl/errors.hpp"
#include "kgcl/schema.hpp"
#include "kgcl/subgraph.hpp"
#include "test_util.hpp"

using namespace kgcl;
using namespace kgcl::testing;

namespace {

// Independent recount: every triple against every (type, type) pair in the
// type universe, membership tested by linear search.
std::map<TypedTriple, std::size_t> brute_counts(const KnowledgeGraph& g) {
  std::map<TypedTriple, std::size_t> out;
  for (const auto& t : g.triples())
    for (TypeId a = 0; a < g.num_types(); ++a)
      for (TypeId b = 0; b < g.num_types(); ++b) {
        const auto& ht = g.types(t.head);
        const auto& tt = g.types(t.tail);
        if (std::find(ht.begin(), ht.end(), a) != ht.end() && std::find(tt.begin(), tt.end(), b) != tt.end())
          ++out[{a, t.relation, b}];
      }
  return out;
}

ContextSubgraph whole(const KnowledgeGraph& g) {
  ContextSubgraph s;
  for (EntityId e = 0; e < g.num_entities(); ++e) s.nodes.push_back(e);
  s.anchor = 0;
  s.max_nodes = s.nodes.size();
  s.triples = g.triples();
  return s;
}

}  // namespace

TEST(CountTypedTriples, Toy) {
  auto g = t1_graph();
  auto f = count_typed_triples(g);
  const auto A = type(g, "A"), B = type(g, "B"), C = type(g, "C");
  const auto r1 = rel(g, "r1"), r2 = rel(g, "r2");
  FrequencyMap expect{{{A, r1, B}, 3}, {{A, r2, C}, 1}, {{B, r2, C}, 1}};
  EXPECT_EQ(f, expect);
}

TEST(CountTypedTriples, MultiTypeExpansion) {
  auto vocab = std::make_shared<Vocabulary>();
  auto t = load_triples(write_file("mt.tsv", "x\tr\ty\n"), *vocab);
  auto ty = load_entity_types(write_file("mt_types.tsv", "x\tA\nx\tB\ny\tC\n"), *vocab);
  auto g = KnowledgeGraph::build(t, ty, vocab);
  auto f = count_typed_triples(g);
  const auto A = type(g, "A"), B = type(g, "B"), C = type(g, "C");
  FrequencyMap expect{{{A, 0, C}, 1}, {{B, 0, C}, 1}};
  EXPECT_EQ(f, expect);
}

TEST(CountTypedTriples, EmptyGraph) {
  auto g = KnowledgeGraph::build({}, {}, std::make_shared<Vocabulary>());
  EXPECT_TRUE(count_typed_triples(g).empty());
  EXPECT_TRUE(count_typed_triples_parallel(g).empty());
}

TEST(BuildSchema, ToyAlphaTwo) {
  auto g = t1_graph();
  auto s = build_schema(count_typed_triples(g), 2);
  std::set<TypedTriple> expect{{type(g, "A"), rel(g, "r1"), type(g, "B")}};
  EXPECT_EQ(s.membership, expect);
}

TEST(BuildSchema, ToyAlphaOne) {
  auto g = t1_graph();
  auto s = build_schema(count_typed_triples(g), 1);
  EXPECT_EQ(s.size(), 3u);
}

TEST(BuildSchema, AlphaZeroRejected) {
  auto g = t1_graph();
  EXPECT_THROW(build_schema(count_typed_triples(g), 0), ConfigError);
}

TEST(BuildSchema, MatchesBruteForceOnRandomGraphs) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_graph(rng, 60, 4, 6, 200, 5);
    auto freq = count_typed_triples(g);
    auto oracle = brute_counts(g);
    ASSERT_EQ(freq.size(), oracle.size());
    EXPECT_TRUE(std::equal(freq.begin(), freq.end(), oracle.begin()));
    EXPECT_EQ(count_typed_triples_parallel(g), freq);
    std::size_t max_count = 0;
    for (const auto& [k, c] : oracle) max_count = std::max(max_count, c);
    std::set<TypedTriple> previous;
    for (std::size_t alpha = 1; alpha <= max_count + 1; ++alpha) {
      auto s = build_schema(freq, alpha);
      std::set<TypedTriple> expect;
      for (const auto& [k, c] : oracle)
        if (c >= alpha) expect.insert(k);
      EXPECT_EQ(s.membership, expect);
      for (const auto& m : s.membership) {
        EXPECT_GE(s.frequency.at(m), alpha);
        if (alpha > 1) EXPECT_TRUE(previous.contains(m));
      }
      previous = s.membership;
    }
  }
}

TEST(ContextSchema, WholeToyGraphAlphaTwo) {
  auto g = t1_graph();
  auto s = build_schema(count_typed_triples(g), 2);
  auto cs = context_schema(g, s, whole(g));
  EXPECT_EQ(cs.typed_triples, (std::vector<TypedTriple>{{type(g, "A"), rel(g, "r1"), type(g, "B")}}));
}

TEST(ContextSchema, NoConformingTriple) {
  auto g = t1_graph();
  auto s = build_schema(count_typed_triples(g), 2);
  ContextSubgraph sub;
  sub.nodes = {id(g, "b1"), id(g, "c1")};
  sub.triples = induced_triples(g, sub.nodes);
  EXPECT_TRUE(context_schema(g, s, sub).typed_triples.empty());
}

TEST(ContextSchema, SingleTriple) {
  auto g = t1_graph();
  auto s = build_schema(count_typed_triples(g), 1);
  ContextSubgraph sub;
  sub.nodes = {id(g, "a1"), id(g, "b1")};
  sub.triples = {{id(g, "a1"), rel(g, "r1"), id(g, "b1")}};
  EXPECT_EQ(context_schema(g, s, sub).typed_triples,
            (std::vector<TypedTriple>{{type(g, "A"), rel(g, "r1"), type(g, "B")}}));
}

TEST(ContextSchema, SubsetOfSchemaOnRandomGraphs) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_graph(rng, 30, 3, 4, 80, 3);
    auto s = build_schema(count_typed_triples(g), 2);
    for (EntityId e = 0; e < g.num_entities(); e += 3) {
      auto sub = random_walk_context(g, e, 6, 30, static_cast<std::uint64_t>(trial * 100 + e));
      auto cs = context_schema(g, s, sub);
      EXPECT_TRUE(std::is_sorted(cs.typed_triples.begin(), cs.typed_triples.end()));
      for (const auto& t : cs.typed_triples) EXPECT_TRUE(s.contains(t));
    }
  }
}

TEST(SchemaKey, OrderInsensitive) {
  ContextSchema a{{{0, 0, 1}, {0, 1, 2}}};
  ContextSchema b{{{0, 1, 2}, {0, 0, 1}}};
  EXPECT_EQ(schema_key(a), schema_key(b));
}

TEST(SchemaKey, EmptySentinel) {
  EXPECT_EQ(schema_key(ContextSchema{}), schema_key(ContextSchema{}));
  EXPECT_FALSE(schema_key(ContextSchema{}).empty());
  EXPECT_NE(schema_key(ContextSchema{}), schema_key(ContextSchema{{{0, 0, 0}}}));
}

TEST(SchemaKey, DistinctSetsDistinctKeys) {
  EXPECT_NE(schema_key(ContextSchema{{{0, 0, 1}}}), schema_key(ContextSchema{{{0, 0, 2}}}));
  std::set<SchemaKey> keys;
  std::vector<TypedTriple> universe;
  for (TypeId a = 0; a < 2; ++a)
    for (RelationId r = 0; r < 2; ++r)
      for (TypeId b = 0; b < 2; ++b) universe.push_back({a, r, b});
  for (unsigned mask = 0; mask < (1u << universe.size()); ++mask) {
    ContextSchema cs;
    for (std::size_t i = 0; i < universe.size(); ++i)
      if (mask & (1u << i)) cs.typed_triples.push_back(universe[i]);
    keys.insert(schema_key(cs));
  }
  EXPECT_EQ(keys.size(), std::size_t{1} << universe.size());
}

TEST(SchemaFile, RoundTrip) {
  auto g = t1_graph();
  auto s = build_schema(count_typed_triples(g), 1);
  auto p = temp_path("schema.tsv");
  write_schema(p, s, g.vocab());
  Vocabulary v = g.vocab();
  auto back = read_schema(p, v);
  EXPECT_EQ(back.membership, s.membership);
  EXPECT_EQ(back.alpha, 1u);
  std::ifstream in(p);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "A\tr1\tB\t3");
}
