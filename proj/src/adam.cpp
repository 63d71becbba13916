#include "kgcl/adam.hpp"

#include <cmath>
#include <string>

#include "kgcl/errors.hpp"

namespace kgcl {

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr) {
  if (state.m.empty() && state.step == 0) {
    for (auto* p : params) {
      state.m.emplace_back(p->value.rows(), p->value.cols());
      state.v.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (state.m.size() != params.size())
    throw ShapeError("adam_step: state tracks " + std::to_string(state.m.size()) +
                     " parameters, given " + std::to_string(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = *params[k];
    if (!state.m[k].same_shape(p.value) || (!p.grad.empty() && !p.grad.same_shape(p.value)))
      throw ShapeError("adam_step: shape mismatch for parameter " + p.name);
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    const bool has_grad = !p.grad.empty();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = has_grad ? p.grad[i] : 0.0;
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace kgcl
