#include "kgcl/training.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "kgcl/errors.hpp"
#include "kgcl/losses.hpp"
#include "kgcl/rng.hpp"
#include "kgcl/subgraph.hpp"

namespace kgcl {

namespace {

struct AnchorContext {
  EntityId entity = 0;
  ContextSubgraph context;
  std::vector<EntityId> positives;
  std::vector<std::size_t> positive_rows;
  SchemaKey key;
};

std::vector<AnchorContext> anchor_contexts(const KnowledgeGraph& graph, const SchemaTensor& schema,
                                           const TrainConfig& config, std::size_t epoch,
                                           PretrainStats& stats) {
  std::vector<AnchorContext> out;
  for (EntityId e = 0; e < graph.num_entities(); ++e) {
    auto adj = graph.adjacency(e);
    if (std::none_of(adj.begin(), adj.end(), [](const AdjacentEdge& a) { return a.outgoing; })) continue;
    AnchorContext a;
    a.entity = e;
    a.context = random_walk_context(graph, e, config.context_subgraph_size, config.context_walk_length,
                                    derive_seed(config.seed, {0xa11c, epoch, e}));
    a.positives = positives(a.context, e);
    if (a.positives.empty()) {
      ++stats.skipped_no_positive;
      continue;
    }
    for (EntityId p : a.positives) a.positive_rows.push_back(*a.context.index_of(p));
    a.key = schema_key(context_schema(graph, schema, a.context));
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(const KnowledgeGraph& graph,
                                                   const std::vector<AnchorContext>& anchors,
                                                   const TrainConfig& config, std::size_t epoch) {
  Rng rng(derive_seed(config.seed, {0xba7c, epoch}));
  std::vector<std::size_t> order;
  if (config.schema_bucketing) {
    // Anchors sharing (schema key, type set) are kept adjacent so that they
    // land in the same batch; group order itself is shuffled.
    std::map<std::pair<SchemaKey, TypeSet>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < anchors.size(); ++i)
      groups[{anchors[i].key, graph.types(anchors[i].entity)}].push_back(i);
    std::vector<std::vector<std::size_t>> buckets;
    for (auto& [k, members] : groups) buckets.push_back(std::move(members));
    std::shuffle(buckets.begin(), buckets.end(), rng);
    for (auto& b : buckets) {
      std::shuffle(b.begin(), b.end(), rng);
      order.insert(order.end(), b.begin(), b.end());
    }
  } else {
    order.resize(anchors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += config.batch_size_pretrain) {
    auto end = std::min(order.size(), i + config.batch_size_pretrain);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<double> row_values(const Tensor& t, std::size_t r) {
  auto v = t.row(r);
  return {v.begin(), v.end()};
}

// Index of each distinct entity in first-seen order.
struct EntityIndex {
  std::vector<EntityId> entities;
  std::unordered_map<EntityId, std::size_t> pos;

  std::size_t add(EntityId e) {
    auto [it, inserted] = pos.emplace(e, entities.size());
    if (inserted) entities.push_back(e);
    return it->second;
  }
};

std::vector<EntityId> relation_negatives_for(const KnowledgeGraph& graph, const AnchorContext& a,
                                             std::size_t cap, const TrainConfig& config, std::size_t epoch) {
  Rng rng(derive_seed(config.seed, {0x7e1a, epoch, a.entity}));
  std::vector<TypeSet> seen;
  std::vector<EntityId> out;
  for (EntityId o : a.positives) {
    const auto& ts = graph.types(o);
    if (std::find(seen.begin(), seen.end(), ts) != seen.end()) continue;
    seen.push_back(ts);
    if (out.size() >= cap) break;
    auto negs = relation_level_negatives(graph, a.entity, ts, cap - out.size(), rng, config.type_match);
    out.insert(out.end(), negs.begin(), negs.end());
  }
  return out;
}

}  // namespace

Var encode_isolated(const BoundModel& model, std::span<const EntityId> entities) {
  Var h = model.entity_columns(entities);
  std::vector<Var> outputs;
  for (std::size_t i = 0; i < model.params().num_layers(); ++i) {
    Var residual = ad::add(ad::matmul(model.translation(i), h), h);
    h = ad::elu(ad::add_col_broadcast(ad::matmul(model.enc_weight(), residual), model.enc_bias()));
    outputs.push_back(h);
  }
  Var mean = outputs.size() == 1 ? outputs.front() : ad::mean_of(outputs);
  return ad::transpose(mean);
}

PretrainStats pretrain(const KnowledgeGraph& graph, const SchemaTensor& schema, ModelParams& params,
                       const TrainConfig& config, PhaseState& state) {
  config.validate();
  PretrainStats stats;
  if (state.queue.capacity() != config.queued_negative_batches && state.queue.empty())
    state.queue = PreBatchQueue(config.queued_negative_batches);

  double lambda = config.balancing_coefficient;
  if (config.disable_global) lambda = 0.0;
  if (config.disable_contextual) lambda = 1.0;
  const bool use_contextual = !config.disable_contextual && lambda < 1.0;
  const bool use_global = !config.disable_global && lambda > 0.0;
  const bool relation_mode = config.negative_mode == NegativeMode::Relation;
  const double tau = config.temperature;
  auto trainable = params.trainable(config.freeze_structure);

  for (std::size_t epoch = state.epochs_done; epoch < config.epoch_pretrain; ++epoch) {
    auto anchors = anchor_contexts(graph, schema, config, epoch, stats);
    stats.anchors += anchors.size();
    auto batches = make_batches(graph, anchors, config, epoch);
    double epoch_loss = 0.0;
    std::size_t counted = 0;

    for (const auto& batch : batches) {
      Tape tape;
      BoundModel model(tape, params);
      model.freeze_entities(config.freeze_structure);

      // Encode every anchor context; rows are stacked into one block.
      std::vector<Var> encoded;
      std::vector<std::size_t> offset;
      std::size_t rows = 0;
      for (auto idx : batch) {
        const auto& a = anchors[idx];
        offset.push_back(rows);
        encoded.push_back(encode_context(model, model.entity_columns(a.context.nodes)).nodes);
        rows += a.context.nodes.size();
      }
      Var block = encoded.size() == 1 ? encoded.front() : ad::concat_rows(encoded);
      const Tensor& bv = block.value();

      RecordBatch records;
      records.reserve(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& a = anchors[batch[i]];
        AnchorRecord r;
        r.entity = a.entity;
        r.key = a.key;
        r.types = graph.types(a.entity);
        r.positives = a.positives;
        r.context = a.context.nodes;
        r.embedding = row_values(bv, offset[i]);
        for (auto pr : a.positive_rows) r.positive_embeddings.push_back(row_values(bv, offset[i] + pr));
        r.batch_index = state.batches_done;
        records.push_back(std::move(r));
      }

      // Queued positive embeddings as one constant block.
      std::vector<std::vector<std::vector<std::size_t>>> queue_row;  // [age-1][record][positive]
      Tensor queue_values;
      if (use_contextual && !relation_mode && !state.queue.empty()) {
        std::vector<double> flat;
        std::size_t qrows = 0;
        for (std::size_t age = 1; age <= state.queue.size(); ++age) {
          const auto& qb = state.queue.at_age(age);
          auto& per_record = queue_row.emplace_back();
          for (const auto& r : qb) {
            auto& per_pos = per_record.emplace_back();
            for (const auto& e : r.positive_embeddings) {
              per_pos.push_back(qrows++);
              flat.insert(flat.end(), e.begin(), e.end());
            }
          }
        }
        if (qrows > 0) queue_values = Tensor(qrows, params.dim, std::move(flat));
      }
      std::optional<Var> queue_block;
      if (!queue_values.empty()) queue_block = tape.constant(std::move(queue_values));

      // Negative selection first, so shared projections are computed once.
      std::vector<std::vector<std::size_t>> live_neg(batch.size()), queued_neg(batch.size());
      std::vector<std::vector<std::size_t>> rel_ctx_neg(batch.size()), struct_neg(batch.size());
      EntityIndex rel_entities, struct_entities;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& a = anchors[batch[i]];
        if (relation_mode) {
          const std::size_t cap = std::max(use_contextual ? config.max_intra_negatives : 0,
                                           use_global ? config.max_inter_negatives : 0);
          auto negs = relation_negatives_for(graph, a, cap, config, epoch);
          if (use_contextual)
            for (std::size_t k = 0; k < negs.size() && k < config.max_intra_negatives; ++k)
              rel_ctx_neg[i].push_back(rel_entities.add(negs[k]));
          if (use_global)
            for (std::size_t k = 0; k < negs.size() && k < config.max_inter_negatives; ++k)
              struct_neg[i].push_back(struct_entities.add(negs[k]));
          continue;
        }
        if (use_contextual) {
          for (const auto& ref : intra_schema_negatives(records, state.queue, i, config.max_intra_negatives,
                                                        config.type_match)) {
            if (ref.age == 0)
              live_neg[i].push_back(offset[ref.record] + anchors[batch[ref.record]].positive_rows[ref.positive]);
            else
              queued_neg[i].push_back(queue_row[ref.age - 1][ref.record][ref.positive]);
          }
        }
        if (use_global)
          for (EntityId e : inter_schema_negatives(records, i, config.max_inter_negatives))
            struct_neg[i].push_back(struct_entities.add(e));
      }

      std::optional<Var> rel_block, block_proj, struct_proj;
      if (!rel_entities.entities.empty()) rel_block = encode_isolated(model, rel_entities.entities);
      if (use_global) {
        block_proj = project(model, block);
        if (!struct_entities.entities.empty())
          struct_proj = project(model, model.entity_rows(struct_entities.entities));
      }

      std::vector<AnchorLoss> losses;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& a = anchors[batch[i]];
        const std::size_t anchor_row[] = {offset[i]};
        std::vector<std::size_t> pos_rows;
        for (auto pr : a.positive_rows) pos_rows.push_back(offset[i] + pr);
        AnchorLoss l;
        if (use_contextual) {
          std::vector<Var> parts;
          if (!live_neg[i].empty()) parts.push_back(ad::select_rows(block, live_neg[i]));
          if (!queued_neg[i].empty()) parts.push_back(ad::select_rows(*queue_block, queued_neg[i]));
          if (!rel_ctx_neg[i].empty()) parts.push_back(ad::select_rows(*rel_block, rel_ctx_neg[i]));
          std::optional<Var> neg;
          if (parts.size() == 1) neg = parts.front();
          if (parts.size() > 1) neg = ad::concat_rows(parts);
          if (!neg) ++stats.empty_contextual_negatives;
          l.contextual = contextual_loss(ad::select_rows(block, anchor_row), ad::select_rows(block, pos_rows),
                                         neg, tau);
        }
        if (use_global) {
          std::optional<Var> neg;
          if (!struct_neg[i].empty()) neg = ad::select_rows(*struct_proj, struct_neg[i]);
          else ++stats.empty_global_negatives;
          l.global = global_loss(ad::select_rows(*block_proj, anchor_row),
                                 ad::select_rows(*block_proj, pos_rows), neg, tau);
        }
        losses.push_back(l);
      }

      if (losses.empty()) {
        ++stats.empty_batches;
      } else {
        Var loss = joint_pretrain_loss(tape, losses, lambda);
        params.zero_grad();
        tape.backward(loss);
        adam_step(trainable, state.adam, config.learning_rate_pretrain);
        epoch_loss += loss.item();
        ++counted;
      }
      state.queue.push(std::move(records));
      ++state.batches_done;
    }
    stats.epoch_loss.push_back(counted ? epoch_loss / static_cast<double>(counted) : 0.0);
    state.epochs_done = epoch + 1;
  }
  return stats;
}

PretrainStats pretrain(const KnowledgeGraph& graph, const SchemaTensor& schema, ModelParams& params,
                       const TrainConfig& config) {
  PhaseState state;
  return pretrain(graph, schema, params, config, state);
}

Var triple_logit_var(const BoundModel& model, const KnowledgeGraph& graph, const Triple& triple,
                     const TrainConfig& config) {
  std::vector<EntityId> nodes;
  std::size_t tail_row = 0;
  if (triple.head == triple.tail) {
    nodes = {triple.head};
  } else {
    auto ctx = shortest_path_context(graph, triple.head, triple.tail, config.context_subgraph_size,
                                     config.mask_target_edge);
    tail_row = *ctx.index_of(triple.tail);
    nodes = std::move(ctx.nodes);
  }
  Var rows = model.entity_rows(nodes);
  Var z = model.relation_row(triple.relation);
  std::vector<Var> parts;
  if (config.compose_all_nodes) {
    for (std::size_t i = 0; i < nodes.size(); ++i) parts.push_back(compose(ad::row(rows, i), z, config.composition));
  } else {
    parts.push_back(compose(ad::row(rows, 0), z, config.composition));
    if (nodes.size() > 1) {
      std::vector<std::size_t> rest(nodes.size() - 1);
      std::iota(rest.begin(), rest.end(), std::size_t{1});
      parts.push_back(ad::select_rows(rows, rest));
    }
  }
  Var initial = ad::transpose(parts.size() == 1 ? parts.front() : ad::concat_rows(parts));
  auto enc = encode_context(model, initial);
  return ad::dot(ad::row(enc.nodes, 0), ad::row(enc.nodes, tail_row));
}

Var score_triple_var(const BoundModel& model, const KnowledgeGraph& graph, const Triple& triple,
                     const TrainConfig& config) {
  return ad::sigmoid(triple_logit_var(model, graph, triple, config));
}

FinetuneStats finetune(const KnowledgeGraph& graph, ModelParams& params, const TrainConfig& config,
                       PhaseState& state) {
  config.validate();
  FinetuneStats stats;
  const auto& triples = graph.triples();
  auto trainable = params.all();
  for (std::size_t epoch = state.epochs_done; epoch < config.epoch_finetune; ++epoch) {
    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, {0xf17e, epoch}));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t counted = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size_finetune) {
      const auto end = std::min(order.size(), start + config.batch_size_finetune);
      Tape tape;
      BoundModel model(tape, params);
      std::vector<Var> pos, neg;
      for (std::size_t k = start; k < end; ++k) {
        const auto idx = order[k];
        const auto& t = triples[idx];
        std::vector<Triple> corrupted;
        for (std::size_t j = 0; j < config.finetune_negatives; ++j) {
          Rng local(derive_seed(config.seed, {0xf2, epoch, idx, j}));
          if (auto c = corrupt_triple(graph, t, CorruptSide::Either, local)) corrupted.push_back(*c);
        }
        if (config.finetune_negatives > 0 && corrupted.empty()) {
          ++stats.skipped_no_corruption;
          continue;
        }
        pos.push_back(triple_logit_var(model, graph, t, config));
        for (const auto& c : corrupted) neg.push_back(triple_logit_var(model, graph, c, config));
      }
      if (pos.empty()) continue;
      stats.scored += pos.size() + neg.size();
      Var loss = finetune_loss_logits(tape, pos, neg);
      params.zero_grad();
      tape.backward(loss);
      adam_step(trainable, state.adam, config.learning_rate_finetune);
      epoch_loss += loss.item() / static_cast<double>(pos.size() + neg.size());
      ++counted;
      ++state.batches_done;
    }
    stats.epoch_loss.push_back(counted ? epoch_loss / static_cast<double>(counted) : 0.0);
    state.epochs_done = epoch + 1;
  }
  return stats;
}

FinetuneStats finetune(const KnowledgeGraph& graph, ModelParams& params, const TrainConfig& config) {
  PhaseState state;
  return finetune(graph, params, config, state);
}

double score_triple(const ModelParams& params, const KnowledgeGraph& graph, const Triple& triple,
                    const TrainConfig& config) {
  Tape tape;
  BoundModel model(tape, params);
  return score_triple_var(model, graph, triple, config).item();
}

std::vector<double> score_triples_serial(const ModelParams& params, const KnowledgeGraph& graph,
                                         std::span<const Triple> triples, const TrainConfig& config) {
  std::vector<double> out(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) out[i] = score_triple(params, graph, triples[i], config);
  return out;
}

std::vector<double> score_triples(const ModelParams& params, const KnowledgeGraph& graph,
                                  std::span<const Triple> triples, const TrainConfig& config) {
  std::vector<double> out(triples.size());
  const auto n = static_cast<std::ptrdiff_t>(triples.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = score_triple(params, graph, triples[k], config);
  }
  return out;
}

std::vector<double> context_embedding(const ModelParams& params, const KnowledgeGraph& graph,
                                      EntityId entity, const TrainConfig& config, std::uint64_t seed) {
  auto ctx = random_walk_context(graph, entity, config.context_subgraph_size, config.context_walk_length,
                                 derive_seed(seed, {0xe4b, entity}));
  Tape tape;
  BoundModel model(tape, params);
  auto enc = encode_context(model, model.entity_columns(ctx.nodes));
  return row_values(enc.nodes.value(), 0);
}

}  // namespace kgcl
