#pragma once

#include <vector>

#include "uvireid/dataset.hpp"
#include "uvireid/features.hpp"

namespace uvireid {

// Per-modality clustering result. Label -1 marks noise; cluster ids are
// assigned in order of discovery (ascending index of each cluster's first
// core point), which makes the labeling deterministic.
struct PseudoLabeling {
    std::vector<int> labels;
    int num_clusters = 0;
    std::vector<std::vector<int>> members;  // cluster -> row indices, ascending
};

// DBSCAN over unit vectors with distance = 1 - cosine. A core point has at
// least min_pts neighbors within eps, counting itself; border points join
// the first core cluster that reaches them in scan order.
PseudoLabeling dbscan(const FeatureMatrix& features, double eps, int min_pts);

// Pseudo labels mapped onto the full dataset: originals carry their cluster
// id, augmented views inherit the label of their original, everything else
// (noise, unlabeled) is -1 and stays out of loss batches.
struct DatasetLabels {
    std::vector<int> label;
    int k_visible = 0;
    int k_infrared = 0;
    std::vector<std::vector<int>> members_visible;   // dataset indices, originals only
    std::vector<std::vector<int>> members_infrared;
};

DatasetLabels relabel(const EmbeddingDataset& ds, const PseudoLabeling& visible,
                      const PseudoLabeling& infrared, std::span<const int> visible_rows,
                      std::span<const int> infrared_rows);

}  // namespace uvireid
