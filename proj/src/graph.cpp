#include "kgcl/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kgcl/errors.hpp"
#include "kgcl/rng.hpp"
#include "kgcl/sampling.hpp"

namespace kgcl {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

}  // namespace

std::uint32_t Interner::intern(std::string_view name) {
  std::string key(name);
  auto it = ids_.find(key);
  if (it != ids_.end()) return it->second;
  auto id = static_cast<std::uint32_t>(names_.size());
  names_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

std::optional<std::uint32_t> Interner::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<Triple> load_triples(const std::filesystem::path& path, Vocabulary& vocab) {
  auto in = open_input(path);
  std::vector<Triple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = strip_cr(line);
    if (blank(view)) continue;
    auto f = split_tabs(view);
    if (f.size() != 3)
      throw ParseError(path.string(), lineno,
                       "expected 3 tab-separated fields, got " + std::to_string(f.size()));
    Triple t;
    t.head = vocab.entities.intern(f[0]);
    t.relation = vocab.relations.intern(f[1]);
    t.tail = vocab.entities.intern(f[2]);
    out.push_back(t);
  }
  return out;
}

EntityTypeMap load_entity_types(const std::filesystem::path& path, Vocabulary& vocab) {
  auto in = open_input(path);
  EntityTypeMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = strip_cr(line);
    if (blank(view)) continue;
    auto f = split_tabs(view);
    if (f.size() != 2)
      throw ParseError(path.string(), lineno,
                       "expected 2 tab-separated fields, got " + std::to_string(f.size()));
    vocab.entities.intern(f[0]);
    auto& set = out[std::string(f[0])];
    TypeId t = vocab.types.intern(f[1]);
    auto pos = std::lower_bound(set.begin(), set.end(), t);
    if (pos == set.end() || *pos != t) set.insert(pos, t);
  }
  return out;
}

void write_triples(const std::filesystem::path& path, std::span<const Triple> triples,
                   const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const auto& t : triples) {
    out << vocab.entities.name(t.head) << '\t' << vocab.relations.name(t.relation) << '\t'
        << vocab.entities.name(t.tail) << '\n';
  }
}

void write_split(const std::filesystem::path& dir, const EdgeSplit& split, const Vocabulary& vocab) {
  std::filesystem::create_directories(dir);
  write_triples(dir / "train.tsv", split.train, vocab);
  write_triples(dir / "valid.tsv", split.valid, vocab);
  write_triples(dir / "test.tsv", split.test, vocab);
  std::vector<Triple> negatives = split.valid_negatives;
  negatives.insert(negatives.end(), split.test_negatives.begin(), split.test_negatives.end());
  write_triples(dir / "negatives.tsv", negatives, vocab);
}

KnowledgeGraph KnowledgeGraph::build(std::vector<Triple> triples, const EntityTypeMap& types,
                                     std::shared_ptr<const Vocabulary> vocab) {
  KnowledgeGraph g;
  g.vocab_ = std::move(vocab);
  const auto n = g.vocab_->entities.size();
  g.entity_types_.assign(n, {});
  for (EntityId e = 0; e < n; ++e) {
    auto it = types.find(g.vocab_->entities.name(e));
    if (it != types.end()) g.entity_types_[e] = it->second;
  }

  std::vector<EntityId> untyped;
  for (const auto& t : triples) {
    if (t.head >= n || t.tail >= n || t.relation >= g.vocab_->relations.size())
      throw ValidationError("triple references an id outside the vocabulary");
    for (EntityId e : {t.head, t.tail})
      if (g.entity_types_[e].empty()) untyped.push_back(e);
  }
  if (!untyped.empty()) {
    std::sort(untyped.begin(), untyped.end());
    untyped.erase(std::unique(untyped.begin(), untyped.end()), untyped.end());
    std::ostringstream msg;
    msg << untyped.size() << " triple entities have no type:";
    for (std::size_t i = 0; i < untyped.size() && i < 20; ++i)
      msg << ' ' << g.vocab_->entities.name(untyped[i]);
    if (untyped.size() > 20) msg << " ...";
    throw ValidationError(msg.str());
  }

  g.triples_ = std::move(triples);
  g.index();
  return g;
}

KnowledgeGraph KnowledgeGraph::with_triples(std::vector<Triple> triples) const {
  KnowledgeGraph g;
  g.vocab_ = vocab_;
  g.entity_types_ = entity_types_;
  for (const auto& t : triples)
    if (t.head >= num_entities() || t.tail >= num_entities() || entity_types_[t.head].empty() ||
        entity_types_[t.tail].empty())
      throw ValidationError("subset triple references an untyped or unknown entity");
  g.triples_ = std::move(triples);
  g.index();
  return g;
}

void KnowledgeGraph::index() {
  const auto n = entity_types_.size();
  adjacency_.assign(n, {});
  neighbors_.assign(n, {});
  by_type_.assign(vocab_->types.size(), {});
  triple_set_.clear();
  triple_set_.reserve(triples_.size() * 2);
  for (const auto& t : triples_) {
    adjacency_[t.head].push_back({t.relation, t.tail, true});
    adjacency_[t.tail].push_back({t.relation, t.head, false});
    triple_set_.insert(t);
    if (t.head != t.tail) {
      neighbors_[t.head].push_back(t.tail);
      neighbors_[t.tail].push_back(t.head);
    }
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  for (EntityId e = 0; e < n; ++e)
    for (TypeId t : entity_types_[e]) by_type_[t].push_back(e);
}

bool KnowledgeGraph::linked(EntityId u, EntityId v) const {
  const auto& nb = neighbors_.at(u);
  if (u == v) {
    return std::any_of(adjacency_[u].begin(), adjacency_[u].end(),
                       [u](const AdjacentEdge& e) { return e.neighbor == u; });
  }
  return std::binary_search(nb.begin(), nb.end(), v);
}

EdgeSplit split_edges(const KnowledgeGraph& graph, std::array<double, 3> ratios,
                      std::uint64_t seed) {
  double total = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(total - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0)
    throw ConfigError("split ratios must be non-negative and sum to 1");
  if (graph.triples().empty()) throw ValidationError("cannot split an empty graph");

  std::vector<Triple> shuffled = graph.triples();
  Rng rng(derive_seed(seed, {0x5b1f}));
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  const auto n = shuffled.size();
  auto n_valid = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n)));
  auto n_test = static_cast<std::size_t>(std::llround(ratios[2] * static_cast<double>(n)));
  if (n_valid + n_test > n) n_test = n - n_valid;
  const std::size_t n_train = n - n_valid - n_test;

  EdgeSplit split;
  split.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<Triple> eval(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());

  // Train triples are donated front-to-back when an eval positive has no
  // corruption; the failing positive takes the donor's place in train.
  std::size_t donor = 0;
  std::vector<Triple> negatives(eval.size());
  std::vector<char> dropped(eval.size(), 0);
  for (std::size_t i = 0; i < eval.size(); ++i) {
    Rng local(derive_seed(seed, {0xc0de, i}));
    auto neg = corrupt_triple(graph, eval[i], CorruptSide::Either, local);
    while (!neg) {
      ++split.resampled;
      if (donor >= split.train.size()) break;
      std::swap(eval[i], split.train[donor++]);
      neg = corrupt_triple(graph, eval[i], CorruptSide::Either, local);
    }
    if (!neg) {
      split.train.push_back(eval[i]);
      dropped[i] = 1;
      continue;
    }
    negatives[i] = *neg;
  }

  for (std::size_t i = 0; i < eval.size(); ++i) {
    if (dropped[i]) continue;
    if (i < n_valid) {
      split.valid.push_back(eval[i]);
      split.valid_negatives.push_back(negatives[i]);
    } else {
      split.test.push_back(eval[i]);
      split.test_negatives.push_back(negatives[i]);
    }
  }
  return split;
}

}  // namespace kgcl
