#include "kgcl/schema.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "kgcl/errors.hpp"
#include "kgcl/subgraph.hpp"

namespace kgcl {

namespace {

void add_combinations(const KnowledgeGraph& graph, const Triple& t, FrequencyMap& out) {
  for (TypeId hs : graph.types(t.head))
    for (TypeId to : graph.types(t.tail)) ++out[TypedTriple{hs, t.relation, to}];
}

}  // namespace

FrequencyMap count_typed_triples(const KnowledgeGraph& graph) {
  FrequencyMap counts;
  for (const auto& t : graph.triples()) add_combinations(graph, t, counts);
  return counts;
}

FrequencyMap count_typed_triples_parallel(const KnowledgeGraph& graph) {
  const auto& triples = graph.triples();
  const auto n = static_cast<std::ptrdiff_t>(triples.size());
  FrequencyMap merged;
#pragma omp parallel
  {
    FrequencyMap local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) add_combinations(graph, triples[i], local);
#pragma omp critical(kgcl_schema_merge)
    for (const auto& [k, c] : local) merged[k] += c;
  }
  return merged;
}

SchemaTensor build_schema(const FrequencyMap& frequency, std::size_t alpha) {
  if (alpha < 1) throw ConfigError("schema threshold alpha must be >= 1");
  SchemaTensor s;
  s.alpha = alpha;
  s.frequency = frequency;
  for (const auto& [k, c] : frequency)
    if (c >= alpha) s.membership.insert(s.membership.end(), k);
  return s;
}

ContextSchema context_schema(const KnowledgeGraph& graph, const SchemaTensor& schema,
                             const ContextSubgraph& subgraph) {
  ContextSchema out;
  for (const auto& t : subgraph.triples)
    for (TypeId hs : graph.types(t.head))
      for (TypeId to : graph.types(t.tail)) {
        TypedTriple tt{hs, t.relation, to};
        if (schema.contains(tt)) out.typed_triples.push_back(tt);
      }
  std::sort(out.typed_triples.begin(), out.typed_triples.end());
  out.typed_triples.erase(std::unique(out.typed_triples.begin(), out.typed_triples.end()),
                          out.typed_triples.end());
  return out;
}

SchemaKey schema_key(const ContextSchema& schema) {
  auto sorted = schema.typed_triples;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  // Non-empty keys are multiples of 12 bytes, so a 1-byte sentinel cannot collide.
  if (sorted.empty()) return SchemaKey(1, '\xff');
  SchemaKey key;
  key.reserve(sorted.size() * 12);
  auto put = [&key](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) key.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  };
  for (const auto& t : sorted) {
    put(t.head);
    put(t.relation);
    put(t.tail);
  }
  return key;
}

void write_schema(const std::filesystem::path& path, const SchemaTensor& schema,
                  const Vocabulary& vocab) {
  using Row = std::tuple<std::string, std::string, std::string, std::size_t>;
  std::vector<Row> rows;
  rows.reserve(schema.membership.size());
  for (const auto& t : schema.membership)
    rows.emplace_back(vocab.types.name(t.head), vocab.relations.name(t.relation),
                      vocab.types.name(t.tail), schema.frequency.at(t));
  std::sort(rows.begin(), rows.end());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const auto& [h, r, t, c] : rows) out << h << '\t' << r << '\t' << t << '\t' << c << '\n';
}

SchemaTensor read_schema(const std::filesystem::path& path, Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  FrequencyMap freq;
  std::string line;
  std::size_t lineno = 0;
  std::size_t alpha = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    if (f.size() != 4) throw ParseError(path.string(), lineno, "expected 4 fields");
    std::size_t count = 0;
    try {
      count = std::stoull(f[3]);
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "bad count '" + f[3] + "'");
    }
    TypedTriple t{vocab.types.intern(f[0]), vocab.relations.intern(f[1]), vocab.types.intern(f[2])};
    freq[t] = count;
    alpha = alpha == 0 ? count : std::min(alpha, count);
  }
  return build_schema(freq, std::max<std::size_t>(alpha, 1));
}

}  // namespace kgcl
