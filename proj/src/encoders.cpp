#include "kgcl/encoders.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <unordered_map>

#include "kgcl/errors.hpp"
#include "kgcl/rng.hpp"

namespace kgcl {

namespace {

Tensor xavier(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-a, a);
  Tensor t(rows, cols);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

}  // namespace

std::vector<Parameter*> ModelParams::all() {
  std::vector<Parameter*> out{&entity, &relation};
  for (auto& l : layers) {
    out.push_back(&l.translation);
    for (auto& q : l.query) out.push_back(&q);
    for (auto& k : l.key) out.push_back(&k);
  }
  for (auto* p : {&enc_weight, &enc_bias, &proj_w1, &proj_b1, &proj_w2, &proj_b2}) out.push_back(p);
  return out;
}

std::vector<const Parameter*> ModelParams::all() const {
  auto ps = const_cast<ModelParams*>(this)->all();
  return {ps.begin(), ps.end()};
}

std::vector<Parameter*> ModelParams::trainable(bool freeze_entity) {
  auto ps = all();
  if (freeze_entity) ps.erase(ps.begin());
  return ps;
}

void ModelParams::zero_grad() {
  for (auto* p : all()) p->grad = Tensor{};
}

ModelParams ModelParams::init(std::size_t num_entities, std::size_t num_relations,
                              const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams m;
  m.dim = config.embedding_dim;
  m.projection_dim = config.projection_dim;
  m.heads = config.heads;
  const auto d = m.dim;
  const auto dh = d / m.heads;
  Rng rng(derive_seed(seed, {0x1417}));

  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  Tensor ent(num_entities, d);
  for (auto& v : ent.values()) v = normal(rng);
  m.entity = Parameter("entity", std::move(ent));

  std::normal_distribution<double> noise(0.0, 0.1);
  Tensor rel(num_relations, d);
  for (std::size_t r = 0; r < num_relations; ++r)
    for (std::size_t j = 0; j < d; ++j) {
      double base = 0.0;
      if (config.composition == Composition::Multiply) base = 1.0;
      if (config.composition == Composition::Correlate && j == 0) base = 1.0;
      rel(r, j) = base + noise(rng);
    }
  m.relation = Parameter("relation", std::move(rel));

  for (std::size_t i = 0; i < config.layers; ++i) {
    TranslationLayer l;
    l.translation = Parameter("translation." + std::to_string(i), xavier(d, d, rng));
    for (std::size_t h = 0; h < m.heads; ++h) {
      l.query.emplace_back("query." + std::to_string(i) + "." + std::to_string(h), xavier(d, dh, rng));
      l.key.emplace_back("key." + std::to_string(i) + "." + std::to_string(h), xavier(d, dh, rng));
    }
    m.layers.push_back(std::move(l));
  }
  Tensor enc = xavier(d, d, rng);
  for (std::size_t i = 0; i < d; ++i) enc(i, i) += 1.0;
  m.enc_weight = Parameter("enc_weight", std::move(enc));
  m.enc_bias = Parameter("enc_bias", Tensor(d, 1));
  m.proj_w1 = Parameter("proj_w1", xavier(d, m.projection_dim, rng));
  m.proj_b1 = Parameter("proj_b1", Tensor(1, m.projection_dim));
  m.proj_w2 = Parameter("proj_w2", xavier(m.projection_dim, m.projection_dim, rng));
  m.proj_b2 = Parameter("proj_b2", Tensor(1, m.projection_dim));
  return m;
}

BoundModel::BoundModel(Tape& tape, ModelParams& params)
    : tape_(&tape), params_(&params), mutable_(&params) {
  bind_dense();
}

BoundModel::BoundModel(Tape& tape, const ModelParams& params) : tape_(&tape), params_(&params) {
  bind_dense();
}

void BoundModel::bind_dense() {
  std::vector<Var> leaves;
  if (mutable_) {
    for (auto* p : mutable_->all()) leaves.push_back(p == &mutable_->entity || p == &mutable_->relation ? Var{} : tape_->leaf(*p));
  } else {
    for (const auto* p : params_->all())
      leaves.push_back(p == &params_->entity || p == &params_->relation ? Var{} : tape_->frozen(*p));
  }
  // Same order as ModelParams::all(): entity, relation, per-layer blocks, dense tail.
  std::size_t k = 2;
  for (const auto& l : params_->layers) {
    LayerVars lv;
    lv.translation = leaves[k++];
    for (std::size_t h = 0; h < l.query.size(); ++h) lv.query.push_back(leaves[k++]);
    for (std::size_t h = 0; h < l.key.size(); ++h) lv.key.push_back(leaves[k++]);
    layers_.push_back(std::move(lv));
  }
  enc_w_ = leaves[k++];
  enc_b_ = leaves[k++];
  w1_ = leaves[k++];
  b1_ = leaves[k++];
  w2_ = leaves[k++];
  b2_ = leaves[k++];
}

Var BoundModel::entity_rows(std::span<const EntityId> nodes) const {
  if (mutable_ && !freeze_entities_) return tape_->gather_rows(mutable_->entity, nodes);
  return tape_->frozen_rows(params_->entity, nodes);
}

Var BoundModel::entity_columns(std::span<const EntityId> nodes) const {
  return ad::transpose(entity_rows(nodes));
}

Var BoundModel::entity_row(EntityId e) const {
  const EntityId idx[] = {e};
  return entity_rows(idx);
}

Var BoundModel::relation_row(RelationId r) const {
  const std::uint32_t idx[] = {r};
  if (mutable_) return tape_->gather_rows(mutable_->relation, idx);
  return tape_->frozen_rows(params_->relation, idx);
}

Var attention_matrix(const BoundModel& model, Var h, std::size_t layer) {
  const auto heads = model.params().heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(model.params().dim / heads));
  Var ht = ad::transpose(h);
  std::vector<Var> per_head;
  per_head.reserve(heads);
  for (std::size_t k = 0; k < heads; ++k) {
    Var q = ad::matmul(ht, model.query(layer, k));
    Var kk = ad::matmul(ht, model.key(layer, k));
    Var scores = ad::scale(ad::matmul(q, ad::transpose(kk)), inv_sqrt);
    per_head.push_back(ad::softmax_rows(scores));
  }
  return heads == 1 ? per_head.front() : ad::mean_of(per_head);
}

Var contextual_translation(Var h, Var attention, Var w_sc, Var enc_weight, Var enc_bias) {
  Var mixed = ad::matmul(ad::matmul(w_sc, h), attention);
  Var residual = ad::add(mixed, h);
  return ad::elu(ad::add_col_broadcast(ad::matmul(enc_weight, residual), enc_bias));
}

ContextEncoding encode_context(const BoundModel& model, Var initial) {
  ContextEncoding out;
  std::vector<Var> outputs;
  Var h = initial;
  for (std::size_t i = 0; i < model.params().num_layers(); ++i) {
    Var a = attention_matrix(model, h, i);
    out.attention.push_back(a);
    h = contextual_translation(h, a, model.translation(i), model.enc_weight(), model.enc_bias());
    outputs.push_back(h);
  }
  Var mean = outputs.size() == 1 ? outputs.front() : ad::mean_of(outputs);
  out.nodes = ad::transpose(mean);
  return out;
}

Var project(const BoundModel& model, Var x) {
  Var hidden = ad::elu(ad::add_row_broadcast(ad::matmul(x, model.proj_w1()), model.proj_b1()));
  return ad::add_row_broadcast(ad::matmul(hidden, model.proj_w2()), model.proj_b2());
}

Var compose(Var h, Var z, Composition op) {
  switch (op) {
    case Composition::Subtract: return ad::sub(h, z);
    case Composition::Multiply: return ad::mul(h, z);
    case Composition::Correlate: return ad::cyclic_correlation(h, z);
  }
  throw ConfigError("unknown composition");
}

Tensor load_structure_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                 std::optional<std::size_t> expected_dim) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::unordered_map<std::string, std::vector<double>> rows;
  std::optional<std::size_t> dim = expected_dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), lineno, "missing tab after entity name");
    std::string name = line.substr(0, tab);
    std::istringstream vs(line.substr(tab + 1));
    std::vector<double> v;
    std::string tok;
    while (vs >> tok) {
      try {
        v.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ParseError(path.string(), lineno, "bad number '" + tok + "'");
      }
    }
    if (!dim) dim = v.size();
    if (v.size() != *dim)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": dimension " +
                            std::to_string(v.size()) + ", expected " + std::to_string(*dim));
    rows[name] = std::move(v);
  }
  const auto n = vocab.entities.size();
  Tensor table(n, dim.value_or(0));
  for (EntityId e = 0; e < n; ++e) {
    auto it = rows.find(vocab.entities.name(e));
    if (it == rows.end())
      throw ValidationError("embedding file " + path.string() + " has no row for entity " +
                            vocab.entities.name(e));
    std::copy(it->second.begin(), it->second.end(), table.row(e).begin());
  }
  return table;
}

void write_embeddings(const std::filesystem::path& path, const Tensor& table, const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << std::setprecision(17);
  for (std::size_t e = 0; e < table.rows(); ++e) {
    out << vocab.entities.name(static_cast<std::uint32_t>(e)) << '\t';
    auto r = table.row(e);
    for (std::size_t j = 0; j < r.size(); ++j) out << (j ? " " : "") << r[j];
    out << '\n';
  }
}

}  // namespace kgcl
