// Serial reference vs OpenMP variant for each parallel kernel.

#include <benchmark/benchmark.h>

#include <random>

#include "kgcl/pipeline.hpp"
#include "kgcl/schema.hpp"
#include "kgcl/skipgram.hpp"
#include "kgcl/tensor.hpp"
#include "kgcl/training.hpp"

using namespace kgcl;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Tensor t(r, c);
  for (auto& v : t.values()) v = n(rng);
  return t;
}

const KnowledgeGraph& bench_graph() {
  static const KnowledgeGraph g = [] {
    SyntheticOptions o;
    o.entities = 2000;
    o.triples = 20000;
    o.communities = 50;
    auto s = make_synthetic(o, 1);
    return KnowledgeGraph::build(s.triples, s.types, s.vocab);
  }();
  return g;
}

TrainConfig bench_config() {
  TrainConfig c;
  c.embedding_dim = 32;
  c.projection_dim = 32;
  c.layers = 2;
  c.heads = 4;
  return c;
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_matrix(n, n, 1);
  auto b = random_matrix(n, n, 2);
  Tensor c(n, n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::gemm_parallel(false, false, a, b, c, 0.0);
    else
      kernels::gemm_serial(false, false, a, b, c, 0.0);
    benchmark::DoNotOptimize(c.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <bool Parallel>
void BM_CountTypedTriples(benchmark::State& state) {
  const auto& g = bench_graph();
  for (auto _ : state) {
    auto f = Parallel ? count_typed_triples_parallel(g) : count_typed_triples(g);
    benchmark::DoNotOptimize(f.size());
  }
}

template <bool Parallel>
void BM_Walks(benchmark::State& state) {
  const auto& g = bench_graph();
  for (auto _ : state) {
    auto w = Parallel ? generate_walks_parallel(g, 4, 40, 3) : generate_walks(g, 4, 40, 3);
    benchmark::DoNotOptimize(w.size());
  }
}

template <bool Parallel>
void BM_ScoreTriples(benchmark::State& state) {
  const auto& g = bench_graph();
  auto cfg = bench_config();
  auto params = ModelParams::init(g.num_entities(), g.num_relations(), cfg, 4);
  std::span<const Triple> triples(g.triples().data(), 512);
  for (auto _ : state) {
    auto s = Parallel ? score_triples(params, g, triples, cfg) : score_triples_serial(params, g, triples, cfg);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(triples.size()));
}

}  // namespace

BENCHMARK(BM_Gemm<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_Gemm<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_CountTypedTriples<false>);
BENCHMARK(BM_CountTypedTriples<true>);
BENCHMARK(BM_Walks<false>);
BENCHMARK(BM_Walks<true>);
BENCHMARK(BM_ScoreTriples<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreTriples<true>)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
