#pragma once

#include <iosfwd>
#include <vector>

#include "uvireid/dbscan.hpp"
#include "uvireid/memory_bank.hpp"
#include "uvireid/translation.hpp"

namespace uvireid {

struct MatchEvidence {
    int votes = 0;
    int runner_votes = 0;
    double cosine = 0.0;  // similarity between the source centroid and the winner
};

// Bidirectional cluster correspondence. Every source cluster has exactly one
// match; the two directions are computed independently and need not agree.
struct MatchTable {
    std::vector<int> v_to_i;
    std::vector<int> i_to_v;
    std::vector<MatchEvidence> v_evidence;
    std::vector<MatchEvidence> i_evidence;
};

// Nearest-centroid vote counts; ties go to the lower centroid index.
std::vector<int> vote_assign(const FeatureMatrix& pseudo_feats, const MemoryBank& target);

struct DirectionMatch {
    std::vector<int> match;
    std::vector<MatchEvidence> evidence;
};

// Sequential filtering match, one direction: translate each source cluster's
// members, shortlist the `shortlist` target centroids with the most votes
// (a single voted centroid wins outright), then pick the shortlisted
// centroid most similar to the source centroid. Similarity ties fall back to
// vote count, then lower index.
DirectionMatch sfm_match_direction(const FeatureMatrix& all_feats,
                                   const std::vector<std::vector<int>>& src_members,
                                   const diff::Network& gen, const MemoryBank& src_bank,
                                   const MemoryBank& tgt_bank, int shortlist = 2);

MatchTable sfm_match(const FeatureMatrix& all_feats, const DatasetLabels& labels,
                     const TranslationPair& pair, const MemoryBank& bank_v,
                     const MemoryBank& bank_i, int shortlist = 2);

// Baseline: repeatedly pair the globally most similar unmatched centroids
// until one side runs out; leftover sources take their nearest target.
MatchTable greedy_match(const MemoryBank& bank_v, const MemoryBank& bank_i);

// CSV rows: direction,src,dst,votes,runner_votes,cosine
void write_match_csv(std::ostream& os, const MatchTable& table);

}  // namespace uvireid
