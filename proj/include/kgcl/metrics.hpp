#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kgcl/config.hpp"
#include "kgcl/encoders.hpp"
#include "kgcl/graph.hpp"

namespace kgcl {

/// Binary micro-F1 at `threshold` (score >= threshold predicts 1). With one
/// label per example this equals accuracy.
double micro_f1(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

/// Mann-Whitney AUC: probability that a random positive outscores a random
/// negative, ties counting one half.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

struct Confusion {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;
};

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold);

struct EvalReport {
  double micro_f1 = 0.0;
  double auc_roc = 0.0;
  double threshold = 0.5;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t skipped = 0;
  Confusion confusion;
  std::vector<double> scores;
  std::vector<int> labels;

  /// {micro_f1, auc_roc, threshold, positives, negatives, skipped, confusion}.
  std::string to_json() const;
};

/// Scores every positive and its paired negative against `graph` (the
/// training graph) and computes both metrics.
EvalReport evaluate(const ModelParams& params, const KnowledgeGraph& graph, std::span<const Triple> positives,
                    std::span<const Triple> negatives, const TrainConfig& config);
EvalReport evaluate_serial(const ModelParams& params, const KnowledgeGraph& graph,
                           std::span<const Triple> positives, std::span<const Triple> negatives,
                           const TrainConfig& config);

/// Rows of the score histogram over [0, 1]; the last bin is closed.
struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t positive_count = 0;
  std::size_t negative_count = 0;
};

std::vector<HistogramBin> score_histogram(std::span<const double> scores, std::span<const int> labels,
                                          std::size_t bins);
/// CSV with header "bin_low,bin_high,positive_count,negative_count".
void export_score_histogram(std::span<const double> scores, std::span<const int> labels, std::size_t bins,
                            const std::filesystem::path& path);

enum class EmbeddingView { Structure, Context };
EmbeddingView parse_embedding_view(const std::string& s);

/// One row per entity. The context view encodes each entity's random-walk
/// context; an isolated entity gets its single-node context.
Tensor embedding_table(const ModelParams& params, const KnowledgeGraph& graph, EmbeddingView view,
                       const TrainConfig& config, std::uint64_t seed);
void export_embeddings(const ModelParams& params, const KnowledgeGraph& graph, EmbeddingView view,
                       const TrainConfig& config, std::uint64_t seed, const std::filesystem::path& path);

}  // namespace kgcl
