#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kgcl/autodiff.hpp"

namespace kgcl {

/// Moment accumulators for a fixed, ordered list of parameters.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// One bias-corrected Adam update from each parameter's `grad`. Parameters
/// with an empty gradient are treated as having a zero gradient. Moments are
/// created on the first call; later calls must pass the same shapes.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr);

}  // namespace kgcl
