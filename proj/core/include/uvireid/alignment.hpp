#pragma once

#include <span>
#include <vector>

#include "uvireid/matching.hpp"
#include "uvireid/memory_bank.hpp"
#include "uvireid/tape.hpp"

namespace uvireid {

// Softmax over z . phi_k / tau across a bank's centroids.
struct SimilarityDistribution {
    std::vector<double> probs;
    double tau = 0.0;
};
SimilarityDistribution similarity_distribution(std::span<const double> z, const MemoryBank& bank,
                                               double tau);

// Cross-entropy pulling z toward centroid `matched_id` of the opposite
// modality's bank (one CMA term). Same softmax form as ClusterNCE.
diff::Var cma_term(diff::Tape& tape, diff::Var z, diff::Var target_bank, int matched_id,
                   double tau);

// Symmetric cross-entropy between z's distributions over a real and a pseudo
// bank of the same modality:
//   F = sum_k P(real_k|z) log P(pseudo_k|z) + sum_k P(pseudo_k|z) log P(real_k|z)
// Banks must have equal K (aligned beforehand via the match table).
diff::Var f_clu(diff::Tape& tape, diff::Var z, diff::Var real_bank, diff::Var pseudo_bank,
                double tau);
double f_clu_value(std::span<const double> z, const MemoryBank& real_bank,
                   const MemoryBank& pseudo_bank, double tau);

// Batch-softmax LFC term over per-sample F values:
//   -(1/N) sum_i log(e^{F_i} / sum_j e^{F_j}) = logsumexp(F) - mean(F).
// With plain_mean set, uses -mean(F) instead (kept off by default).
diff::Var lfc_batch_loss(diff::Tape& tape, std::span<const diff::Var> f_values,
                         bool plain_mean = false);

// Reindex a pseudo bank (indexed by opposite-modality clusters) so that slot
// k holds the pseudo centroid of the cluster matched to real cluster k.
MemoryBank aligned_pseudo_bank(const MemoryBank& pseudo, std::span<const int> match_of_real);

// Whole-batch scalar forms used by diagnostics and tests.
double cma_direction_value(const FeatureMatrix& feats, std::span<const int> cluster_ids,
                           std::span<const int> match_map, const MemoryBank& target_bank,
                           double tau);
double lfc_direction_value(const FeatureMatrix& feats, const MemoryBank& real_bank,
                           const MemoryBank& pseudo_aligned, double tau, bool plain_mean = false);

}  // namespace uvireid
