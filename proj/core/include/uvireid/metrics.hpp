#pragma once

#include <span>

#include "uvireid/features.hpp"

namespace uvireid {

struct DirectionMetrics {
    double rank1 = 0, rank5 = 0, rank10 = 0, rank20 = 0;
    double map = 0;
    double minp = 0;
    int num_queries = 0;   // queries actually scored
    int num_excluded = 0;  // queries whose identity is absent from the gallery
    int inp_gt_ap = 0;     // queries where INP exceeded AP (diagnostic; see evaluate)
};

// Cross-modal retrieval: ranks the gallery by cosine for each query
// (similarity ties broken by gallery index), then
//   Rank-k : fraction of queries with a correct match in the top k
//   AP     : mean over the i-th positive at rank r_i of i / r_i
//   INP    : (#positives) / (rank of the hardest positive)
// Queries without any gallery positive are excluded and counted.
//
// INP <= AP is not a theorem (positives packed at the bottom of a short
// gallery violate it), so violations are only counted in inp_gt_ap; the
// pipeline asserts the counter stays zero on its own evaluations.
DirectionMetrics evaluate(const FeatureMatrix& query, std::span<const int> query_ids,
                          const FeatureMatrix& gallery, std::span<const int> gallery_ids);

}  // namespace uvireid
