#include "kgcl/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kgcl/rng.hpp"

namespace kgcl {

namespace {

Walk one_walk(const KnowledgeGraph& graph, EntityId start, std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  Walk w{start};
  w.reserve(length);
  EntityId cur = start;
  while (w.size() < length) {
    auto nb = graph.neighbors(cur);
    if (nb.empty()) break;
    cur = nb[uniform_index(rng, nb.size())];
    w.push_back(cur);
  }
  return w;
}

double sigmoid(double x) {
  if (x > 30.0) return 1.0;
  if (x < -30.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

std::vector<Walk> generate_walks(const KnowledgeGraph& graph, std::size_t walks_per_node,
                                 std::size_t walk_length, std::uint64_t seed) {
  const auto n = graph.num_entities();
  std::vector<Walk> walks(walks_per_node * n);
  for (std::size_t round = 0; round < walks_per_node; ++round)
    for (std::size_t e = 0; e < n; ++e)
      walks[round * n + e] = one_walk(graph, static_cast<EntityId>(e), walk_length,
                                      derive_seed(seed, {round, e}));
  return walks;
}

std::vector<Walk> generate_walks_parallel(const KnowledgeGraph& graph, std::size_t walks_per_node,
                                          std::size_t walk_length, std::uint64_t seed) {
  const auto n = graph.num_entities();
  std::vector<Walk> walks(walks_per_node * n);
  const auto total = static_cast<std::ptrdiff_t>(walks.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    auto round = static_cast<std::size_t>(i) / n;
    auto e = static_cast<std::size_t>(i) % n;
    walks[static_cast<std::size_t>(i)] =
        one_walk(graph, static_cast<EntityId>(e), walk_length, derive_seed(seed, {round, e}));
  }
  return walks;
}

Tensor pretrain_structure_embeddings(const KnowledgeGraph& graph, const SkipGramOptions& opt,
                                     std::uint64_t seed) {
  const auto n = graph.num_entities();
  const auto d = opt.dim;
  Rng rng(derive_seed(seed, {0x5e6}));
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d), 0.5 / static_cast<double>(d));
  Tensor input(n, d);
  for (auto& v : input.values()) v = init(rng);
  if (opt.epochs == 0 || n == 0) return input;
  Tensor output(n, d);

  auto walks = generate_walks_parallel(graph, opt.walks_per_node, opt.walk_length,
                                       derive_seed(seed, {0x3a1c}));

  std::vector<double> freq(n, 0.0);
  std::size_t tokens = 0;
  for (const auto& w : walks) {
    for (auto e : w) freq[e] += 1.0;
    tokens += w.size();
  }
  for (auto& f : freq) f = std::pow(f, 0.75);
  std::discrete_distribution<std::size_t> noise(freq.begin(), freq.end());

  const double total_steps = static_cast<double>(opt.epochs) * static_cast<double>(tokens);
  double done = 0.0;
  std::vector<double> grad_in(d);
  std::uniform_int_distribution<std::size_t> shrink(0, opt.window > 0 ? opt.window - 1 : 0);

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    for (const auto& w : walks) {
      for (std::size_t i = 0; i < w.size(); ++i, done += 1.0) {
        const double lr = std::max(opt.learning_rate * (1.0 - done / total_steps),
                                   opt.learning_rate * 1e-4);
        const std::size_t b = opt.window > 0 ? shrink(rng) : 0;
        const std::size_t span = opt.window - b;
        const std::size_t lo = i >= span ? i - span : 0;
        const std::size_t hi = std::min(w.size() - 1, i + span);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          double* in = input.data() + static_cast<std::size_t>(w[j]) * d;
          std::fill(grad_in.begin(), grad_in.end(), 0.0);
          for (std::size_t s = 0; s <= opt.negatives; ++s) {
            std::size_t target;
            double label;
            if (s == 0) {
              target = w[i];
              label = 1.0;
            } else {
              target = noise(rng);
              if (target == w[i]) continue;
              label = 0.0;
            }
            double* out = output.data() + target * d;
            double f = 0.0;
            for (std::size_t k = 0; k < d; ++k) f += in[k] * out[k];
            const double g = (label - sigmoid(f)) * lr;
            for (std::size_t k = 0; k < d; ++k) grad_in[k] += g * out[k];
            for (std::size_t k = 0; k < d; ++k) out[k] += g * in[k];
          }
          for (std::size_t k = 0; k < d; ++k) in[k] += grad_in[k];
        }
      }
    }
  }
  return input;
}

}  // namespace kgcl
