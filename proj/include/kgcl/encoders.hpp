#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "kgcl/autodiff.hpp"
#include "kgcl/config.hpp"
#include "kgcl/graph.hpp"

namespace kgcl {

struct TranslationLayer {
  Parameter translation;           // W_sc, d x d
  std::vector<Parameter> query;    // per head, d x (d / heads)
  std::vector<Parameter> key;      // per head, d x (d / heads)
};

/// Everything trained by the two phases.
///
/// Orientation follows the translation formula: a context holds its node
/// embeddings as columns (d x n). Projection and scoring work on 1 x d rows.
struct ModelParams {
  std::size_t dim = 0;
  std::size_t projection_dim = 0;
  std::size_t heads = 0;

  Parameter entity;     // |E| x d, structure view
  Parameter relation;   // |R| x d
  std::vector<TranslationLayer> layers;
  Parameter enc_weight; // d x d
  Parameter enc_bias;   // d x 1
  Parameter proj_w1;    // d x d_p
  Parameter proj_b1;    // 1 x d_p
  Parameter proj_w2;    // d_p x d_p
  Parameter proj_b2;    // 1 x d_p

  std::size_t num_layers() const noexcept { return layers.size(); }

  /// Stable ordering used by the optimizer and checkpoints.
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  /// all() minus the entity table when `freeze_entity` is set.
  std::vector<Parameter*> trainable(bool freeze_entity);
  void zero_grad();

  /// Seeded initialisation. Relation rows start at the identity element of the
  /// chosen composition (plus noise) so that composed heads begin close to h_s.
  static ModelParams init(std::size_t num_entities, std::size_t num_relations,
                          const TrainConfig& config, std::uint64_t seed);
};

/// Leaves for every dense weight, recorded once per tape. A model bound
/// through a const reference records constants only, so any number of tapes
/// can score against it concurrently.
class BoundModel {
 public:
  BoundModel(Tape& tape, ModelParams& params);
  BoundModel(Tape& tape, const ModelParams& params);

  Tape& tape() const { return *tape_; }
  const ModelParams& params() const { return *params_; }
  bool frozen() const noexcept { return mutable_ == nullptr; }
  /// When set, entity rows are read as constants even on a mutable model.
  void freeze_entities(bool on) { freeze_entities_ = on; }

  /// Rows of the entity table as a d x n column block.
  Var entity_columns(std::span<const EntityId> nodes) const;
  /// n x d
  Var entity_rows(std::span<const EntityId> nodes) const;
  /// 1 x d rows.
  Var entity_row(EntityId e) const;
  Var relation_row(RelationId r) const;

  Var translation(std::size_t layer) const { return layers_[layer].translation; }
  Var query(std::size_t layer, std::size_t head) const { return layers_[layer].query[head]; }
  Var key(std::size_t layer, std::size_t head) const { return layers_[layer].key[head]; }
  Var enc_weight() const { return enc_w_; }
  Var enc_bias() const { return enc_b_; }
  Var proj_w1() const { return w1_; }
  Var proj_b1() const { return b1_; }
  Var proj_w2() const { return w2_; }
  Var proj_b2() const { return b2_; }

 private:
  struct LayerVars {
    Var translation;
    std::vector<Var> query, key;
  };
  void bind_dense();

  Tape* tape_;
  const ModelParams* params_;
  ModelParams* mutable_ = nullptr;
  bool freeze_entities_ = false;
  std::vector<LayerVars> layers_;
  Var enc_w_, enc_b_, w1_, b1_, w2_, b2_;
};

/// Scaled dot-product attention averaged over heads. `h` is d x n; the result
/// is n x n with rows summing to one.
Var attention_matrix(const BoundModel& model, Var h, std::size_t layer);

/// Enc(W_sc H A + H), Enc = ELU(W_enc X + b_enc).
Var contextual_translation(Var h, Var attention, Var w_sc, Var enc_weight, Var enc_bias);

struct ContextEncoding {
  /// n x d; row i is the context-view embedding of node i.
  Var nodes;
  std::vector<Var> attention;
};

/// Runs every translation layer from `initial` (d x n) and averages the layer outputs.
ContextEncoding encode_context(const BoundModel& model, Var initial);

/// W2 ELU(x W1 + b1) + b2, applied row-wise; x is 1 x d or n x d.
Var project(const BoundModel& model, Var x);

/// h - z, h * z or the cyclic correlation of h and z.
Var compose(Var h, Var z, Composition op);

/// Rows "entity\tv1 v2 ... vd"; every graph entity must be covered.
Tensor load_structure_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                 std::optional<std::size_t> expected_dim = std::nullopt);
void write_embeddings(const std::filesystem::path& path, const Tensor& table, const Vocabulary& vocab);

}  // namespace kgcl
