#include "kgcl/losses.hpp"

#include <vector>

#include "kgcl/errors.hpp"

namespace kgcl {

Var info_nce(Var anchor, Var positive, std::optional<Var> negative, double tau) {
  if (positive.rows() == 0) throw ShapeError("info_nce: empty positive set");
  if (!(tau > 0.0)) throw ConfigError("temperature must be > 0");
  const double inv_tau = 1.0 / tau;
  Var pos = ad::scale(ad::cosine_rows(anchor, positive), inv_tau);
  Var all = pos;
  if (negative && negative->rows() > 0) {
    Var neg = ad::scale(ad::cosine_rows(anchor, *negative), inv_tau);
    const Var parts[] = {pos, neg};
    all = ad::concat_cols(parts);
  }
  return ad::sub(ad::logsumexp(all), ad::logsumexp(pos));
}

Var mean_scalar(Tape& tape, std::span<const Var> values) {
  if (values.empty()) return tape.scalar(0.0);
  Var total = values.size() == 1 ? values.front() : ad::sum(ad::concat_cols(values));
  return ad::scale(total, 1.0 / static_cast<double>(values.size()));
}

Var joint_pretrain_loss(Tape& tape, std::span<const AnchorLoss> anchors, double lambda) {
  std::vector<Var> combined;
  combined.reserve(anchors.size());
  for (const auto& a : anchors) {
    if (a.global && a.contextual)
      combined.push_back(ad::add(ad::scale(*a.global, lambda), ad::scale(*a.contextual, 1.0 - lambda)));
    else if (a.global)
      combined.push_back(ad::scale(*a.global, lambda));
    else if (a.contextual)
      combined.push_back(ad::scale(*a.contextual, 1.0 - lambda));
  }
  return mean_scalar(tape, combined);
}

Var triple_score(Var head_rel, Var tail) { return ad::sigmoid(ad::dot(head_rel, tail)); }

Var finetune_loss(Tape& tape, std::span<const Var> positive_scores, std::span<const Var> negative_scores) {
  std::vector<Var> terms;
  terms.reserve(positive_scores.size() + negative_scores.size());
  for (auto p : positive_scores) terms.push_back(ad::log(ad::clamp_min(p, kProbabilityFloor)));
  for (auto n : negative_scores)
    terms.push_back(ad::log(ad::clamp_min(ad::affine(n, -1.0, 1.0), kProbabilityFloor)));
  if (terms.empty()) return tape.scalar(0.0);
  Var total = terms.size() == 1 ? terms.front() : ad::sum(ad::concat_cols(terms));
  return ad::scale(total, -1.0);
}

Var finetune_loss_logits(Tape& tape, std::span<const Var> positive_logits, std::span<const Var> negative_logits) {
  std::vector<Var> terms;
  terms.reserve(positive_logits.size() + negative_logits.size());
  for (auto p : positive_logits) terms.push_back(ad::log_sigmoid(p));
  for (auto n : negative_logits) terms.push_back(ad::log_sigmoid(ad::scale(n, -1.0)));
  if (terms.empty()) return tape.scalar(0.0);
  Var total = terms.size() == 1 ? terms.front() : ad::sum(ad::concat_cols(terms));
  return ad::scale(total, -1.0);
}

}  // namespace kgcl
