#include "uvireid/dbscan.hpp"

#include <deque>

#include "uvireid/errors.hpp"

namespace uvireid {

PseudoLabeling dbscan(const FeatureMatrix& features, double eps, int min_pts) {
    int n = features.rows();
    if (n == 0) throw ContractError("dbscan: empty feature list");
    if (eps <= 0.0 || eps >= 2.0) throw ConfigError("dbscan: eps must lie in (0, 2)");
    if (min_pts < 1) throw ConfigError("dbscan: min_pts must be >= 1");

    const double sim_floor = 1.0 - eps;  // distance <= eps, inclusive
    auto neighbors_of = [&](int i) {
        std::vector<int> nbrs;
        std::span<const double> fi = features.row(i);
        for (int j = 0; j < n; ++j)
            if (dot(fi, features.row(j)) >= sim_floor) nbrs.push_back(j);
        return nbrs;
    };

    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    PseudoLabeling out;
    out.labels.assign(static_cast<size_t>(n), kUnvisited);

    int cluster = 0;
    for (int i = 0; i < n; ++i) {
        if (out.labels[static_cast<size_t>(i)] != kUnvisited) continue;
        std::vector<int> nbrs = neighbors_of(i);
        if (static_cast<int>(nbrs.size()) < min_pts) {
            out.labels[static_cast<size_t>(i)] = kNoise;
            continue;
        }
        out.labels[static_cast<size_t>(i)] = cluster;
        std::deque<int> queue(nbrs.begin(), nbrs.end());
        while (!queue.empty()) {
            int j = queue.front();
            queue.pop_front();
            int& lbl = out.labels[static_cast<size_t>(j)];
            if (lbl == kNoise) lbl = cluster;  // border point claimed
            if (lbl != kUnvisited) continue;
            lbl = cluster;
            std::vector<int> next = neighbors_of(j);
            if (static_cast<int>(next.size()) >= min_pts)
                queue.insert(queue.end(), next.begin(), next.end());
        }
        ++cluster;
    }

    out.num_clusters = cluster;
    out.members.assign(static_cast<size_t>(cluster), {});
    for (int i = 0; i < n; ++i) {
        int lbl = out.labels[static_cast<size_t>(i)];
        if (lbl >= 0) out.members[static_cast<size_t>(lbl)].push_back(i);
    }
    return out;
}

DatasetLabels relabel(const EmbeddingDataset& ds, const PseudoLabeling& visible,
                      const PseudoLabeling& infrared, std::span<const int> visible_rows,
                      std::span<const int> infrared_rows) {
    if (visible.labels.size() != visible_rows.size() ||
        infrared.labels.size() != infrared_rows.size())
        throw ContractError("relabel: labeling/row count mismatch");

    DatasetLabels out;
    out.label.assign(static_cast<size_t>(ds.size()), -1);
    out.k_visible = visible.num_clusters;
    out.k_infrared = infrared.num_clusters;
    out.members_visible.assign(static_cast<size_t>(visible.num_clusters), {});
    out.members_infrared.assign(static_cast<size_t>(infrared.num_clusters), {});

    for (size_t r = 0; r < visible_rows.size(); ++r) {
        int idx = visible_rows[r];
        int lbl = visible.labels[r];
        out.label[static_cast<size_t>(idx)] = lbl;
        if (lbl >= 0) out.members_visible[static_cast<size_t>(lbl)].push_back(idx);
        int twin = ds.augmented_of[static_cast<size_t>(idx)];
        if (twin >= 0) out.label[static_cast<size_t>(twin)] = lbl;
    }
    for (size_t r = 0; r < infrared_rows.size(); ++r) {
        int idx = infrared_rows[r];
        int lbl = infrared.labels[r];
        out.label[static_cast<size_t>(idx)] = lbl;
        if (lbl >= 0) out.members_infrared[static_cast<size_t>(lbl)].push_back(idx);
    }
    return out;
}

}  // namespace uvireid
