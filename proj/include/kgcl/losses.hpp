#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "kgcl/autodiff.hpp"

namespace kgcl {

/// Multi-positive InfoNCE with cosine similarity:
///   -log( sum_P exp(cos(a, p) / tau) / sum_{P u N} exp(cos(a, k) / tau) ),
/// computed as a difference of max-shifted log-sum-exps. `anchor` is 1 x d,
/// `positive` |P| x d (|P| >= 1), `negative` |N| x d or absent. With no
/// negatives the two log-sum-exps are the same computation and the loss is
/// exactly zero.
Var info_nce(Var anchor, Var positive, std::optional<Var> negative, double tau);

/// Context-view anchor against context-view positives and intra-schema negatives.
inline Var contextual_loss(Var anchor, Var positive, std::optional<Var> negative, double tau) {
  return info_nce(anchor, positive, negative, tau);
}

/// Projected context-view anchor against projected context-view positives and
/// projected structure-view inter-schema negatives.
inline Var global_loss(Var anchor_proj, Var positive_proj, std::optional<Var> negative_struct_proj,
                       double tau) {
  return info_nce(anchor_proj, positive_proj, negative_struct_proj, tau);
}

/// Per-anchor losses; a level switched off is left empty.
struct AnchorLoss {
  std::optional<Var> global;
  std::optional<Var> contextual;
};

/// Mean over anchors of lambda * L^g + (1 - lambda) * L^c. A missing level
/// contributes nothing. Returns a constant 0 on `tape` when `anchors` is empty.
Var joint_pretrain_loss(Tape& tape, std::span<const AnchorLoss> anchors, double lambda);

/// Sum of scalars, left to right, divided by the count.
Var mean_scalar(Tape& tape, std::span<const Var> values);

/// sigmoid(a . b) for 1 x d rows.
Var triple_score(Var head_rel, Var tail);

/// Negative log-likelihood of positives scoring 1 and negatives scoring 0,
/// with probabilities clamped at 1e-12 before the log.
Var finetune_loss(Tape& tape, std::span<const Var> positive_scores, std::span<const Var> negative_scores);

/// The same objective on logits x (score = sigmoid(x)):
///   sum_pos softplus(-x) + sum_neg softplus(x).
/// Equal to finetune_loss wherever no probability hits the floor, and keeps a
/// nonzero gradient where it would.
Var finetune_loss_logits(Tape& tape, std::span<const Var> positive_logits, std::span<const Var> negative_logits);

inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace kgcl
