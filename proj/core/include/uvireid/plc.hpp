#pragma once

#include <span>

#include "uvireid/memory_bank.hpp"
#include "uvireid/tape.hpp"

namespace uvireid {

// Index of the centroid most similar to z (max cosine; ties -> lower index).
int nearest_centroid(const MemoryBank& bank, std::span<const double> z);
int nearest_centroid_rows(const diff::Tensor& bank, std::span<const double> z);

// Softmax cross-entropy pulling z toward centroid pos_id against all K
// centroids, temperature tau applied to every similarity. The positive term
// stays in the denominator.
diff::Var cluster_nce_loss(diff::Tape& tape, diff::Var z, diff::Var bank, int pos_id, double tau);

// Pseudo-label-corrected contrastive term:
//   pull = (1-w) exp(z.phi+/tau) + w exp(z.c/tau)
//   push = pull + sum over k not in {pos_id, nearest_id} of exp(z.phi_k/tau)
//   loss = -log(pull / push)
// nearest_id must be recomputed from the current state before each call.
diff::Var plc_loss(diff::Tape& tape, diff::Var z, diff::Var bank, int pos_id, int nearest_id,
                   double w, double tau);

// Convenience scalar forms (same code path as the taped builders).
double cluster_nce_value(std::span<const double> z, const MemoryBank& bank, int pos_id, double tau);
double plc_value(std::span<const double> z, const MemoryBank& bank, int pos_id, int nearest_id,
                 double w, double tau);

}  // namespace uvireid
