#pragma once

#include <functional>

#include "uvireid/tape.hpp"
#include "uvireid/tensor.hpp"

namespace uvireid::diff {

// Builds a scalar loss from one leaf tensor on the given tape.
using LossBuilder = std::function<Var(Tape&, Var)>;

// Max over coordinates of |analytic - numeric| / max(1e-12, |numeric|),
// with numeric from central differences at step h. The builder must be a
// pure function of the leaf.
double finite_diff_check(const LossBuilder& f, const Tensor& x, double h = 1e-5);

}  // namespace uvireid::diff
