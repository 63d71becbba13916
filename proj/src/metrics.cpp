#include "kgcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "kgcl/errors.hpp"
#include "kgcl/training.hpp"

namespace kgcl {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw ValidationError("scores and labels differ in length: " + std::to_string(scores.size()) + " vs " +
                          std::to_string(labels.size()));
  if (scores.empty()) throw ValidationError("metrics need at least one example");
  for (int l : labels)
    if (l != 0 && l != 1) throw ValidationError("labels must be 0 or 1, got " + std::to_string(l));
  for (double s : scores)
    if (std::isnan(s)) throw ValidationError("score is NaN");
}

}  // namespace

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels);
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) pred ? ++c.true_positive : ++c.false_negative;
    else pred ? ++c.false_positive : ++c.true_negative;
  }
  return c;
}

double micro_f1(std::span<const double> scores, std::span<const int> labels, double threshold) {
  auto c = confusion_at(scores, labels, threshold);
  // Summed over both classes, micro precision and recall are both the
  // fraction of correct predictions.
  return static_cast<double>(c.true_positive + c.true_negative) / static_cast<double>(scores.size());
}

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_total = 0, neg_total = 0, wins = 0, neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      labels[order[j]] == 1 ? ++pos : ++neg;
      ++j;
    }
    wins += pos * neg_below + 0.5 * pos * neg;
    neg_below += neg;
    pos_total += pos;
    neg_total += neg;
    i = j;
  }
  if (pos_total == 0 || neg_total == 0) throw ValidationError("AUC needs both positive and negative labels");
  return wins / (pos_total * neg_total);
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["micro_f1"] = micro_f1;
  j["auc_roc"] = auc_roc;
  j["threshold"] = threshold;
  j["positives"] = positives;
  j["negatives"] = negatives;
  j["skipped"] = skipped;
  j["confusion"] = {{"true_positive", confusion.true_positive},
                    {"false_positive", confusion.false_positive},
                    {"true_negative", confusion.true_negative},
                    {"false_negative", confusion.false_negative}};
  return j.dump(2);
}

namespace {

template <class Scorer>
EvalReport evaluate_with(std::span<const Triple> positives, std::span<const Triple> negatives,
                         const TrainConfig& config, Scorer&& score) {
  std::vector<Triple> all(positives.begin(), positives.end());
  all.insert(all.end(), negatives.begin(), negatives.end());
  EvalReport r;
  r.threshold = config.threshold;
  r.scores = score(std::span<const Triple>(all));
  r.labels.assign(positives.size(), 1);
  r.labels.resize(all.size(), 0);
  r.positives = positives.size();
  r.negatives = negatives.size();
  r.skipped = positives.size() > negatives.size() ? positives.size() - negatives.size() : 0;
  r.micro_f1 = micro_f1(r.scores, r.labels, r.threshold);
  r.auc_roc = auc_roc(r.scores, r.labels);
  r.confusion = confusion_at(r.scores, r.labels, r.threshold);
  return r;
}

}  // namespace

EvalReport evaluate(const ModelParams& params, const KnowledgeGraph& graph, std::span<const Triple> positives,
                    std::span<const Triple> negatives, const TrainConfig& config) {
  return evaluate_with(positives, negatives, config,
                       [&](std::span<const Triple> t) { return score_triples(params, graph, t, config); });
}

EvalReport evaluate_serial(const ModelParams& params, const KnowledgeGraph& graph,
                           std::span<const Triple> positives, std::span<const Triple> negatives,
                           const TrainConfig& config) {
  return evaluate_with(positives, negatives, config,
                       [&](std::span<const Triple> t) { return score_triples_serial(params, graph, t, config); });
}

std::vector<HistogramBin> score_histogram(std::span<const double> scores, std::span<const int> labels,
                                          std::size_t bins) {
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].low = static_cast<double>(b) / static_cast<double>(bins);
    out[b].high = static_cast<double>(b + 1) / static_cast<double>(bins);
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw ValidationError("score is NaN");
    const double s = std::clamp(scores[i], 0.0, 1.0);
    auto b = std::min(bins - 1, static_cast<std::size_t>(s * static_cast<double>(bins)));
    labels[i] == 1 ? ++out[b].positive_count : ++out[b].negative_count;
  }
  return out;
}

void export_score_histogram(std::span<const double> scores, std::span<const int> labels, std::size_t bins,
                            const std::filesystem::path& path) {
  auto rows = score_histogram(scores, labels, bins);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "bin_low,bin_high,positive_count,negative_count\n";
  for (const auto& r : rows) out << r.low << ',' << r.high << ',' << r.positive_count << ',' << r.negative_count << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

EmbeddingView parse_embedding_view(const std::string& s) {
  if (s == "structure") return EmbeddingView::Structure;
  if (s == "context") return EmbeddingView::Context;
  throw ConfigError("embedding view must be structure or context, got '" + s + "'");
}

Tensor embedding_table(const ModelParams& params, const KnowledgeGraph& graph, EmbeddingView view,
                       const TrainConfig& config, std::uint64_t seed) {
  if (view == EmbeddingView::Structure) return params.entity.value;
  Tensor out(graph.num_entities(), params.dim);
  const auto n = static_cast<std::ptrdiff_t>(graph.num_entities());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto row = context_embedding(params, graph, static_cast<EntityId>(i), config, seed);
    std::copy(row.begin(), row.end(), out.row(static_cast<std::size_t>(i)).begin());
  }
  return out;
}

void export_embeddings(const ModelParams& params, const KnowledgeGraph& graph, EmbeddingView view,
                       const TrainConfig& config, std::uint64_t seed, const std::filesystem::path& path) {
  write_embeddings(path, embedding_table(params, graph, view, config, seed), graph.vocab());
}

}  // namespace kgcl
