#include "uvireid/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "uvireid/errors.hpp"

namespace uvireid {

DirectionMetrics evaluate(const FeatureMatrix& query, std::span<const int> query_ids,
                          const FeatureMatrix& gallery, std::span<const int> gallery_ids) {
    if (query.rows() == 0 || gallery.rows() == 0)
        throw ContractError("evaluate: query and gallery must be non-empty");
    if (static_cast<size_t>(query.rows()) != query_ids.size() ||
        static_cast<size_t>(gallery.rows()) != gallery_ids.size())
        throw ContractError("evaluate: id count mismatch");

    int g = gallery.rows();
    DirectionMetrics out;
    double sum_ap = 0, sum_inp = 0;
    int hit1 = 0, hit5 = 0, hit10 = 0, hit20 = 0;

    std::vector<int> order(static_cast<size_t>(g));
    std::vector<double> sims(static_cast<size_t>(g));
    for (int q = 0; q < query.rows(); ++q) {
        int qid = query_ids[static_cast<size_t>(q)];
        int positives = 0;
        for (int j = 0; j < g; ++j)
            if (gallery_ids[static_cast<size_t>(j)] == qid) ++positives;
        if (positives == 0) {
            ++out.num_excluded;
            continue;
        }

        auto qf = query.row(q);
        for (int j = 0; j < g; ++j) sims[static_cast<size_t>(j)] = dot(qf, gallery.row(j));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return sims[static_cast<size_t>(a)] > sims[static_cast<size_t>(b)];
        });  // stable: similarity ties keep gallery index order

        int seen = 0, first_rank = 0, last_rank = 0;
        double ap = 0;
        for (int rank = 1; rank <= g; ++rank) {
            int j = order[static_cast<size_t>(rank - 1)];
            if (gallery_ids[static_cast<size_t>(j)] != qid) continue;
            ++seen;
            ap += static_cast<double>(seen) / rank;
            if (seen == 1) first_rank = rank;
            last_rank = rank;
        }
        ap /= positives;
        double inp = static_cast<double>(positives) / last_rank;

        sum_ap += ap;
        sum_inp += inp;
        if (inp > ap + 1e-12) ++out.inp_gt_ap;
        if (first_rank <= 1) ++hit1;
        if (first_rank <= 5) ++hit5;
        if (first_rank <= 10) ++hit10;
        if (first_rank <= 20) ++hit20;
        ++out.num_queries;
    }

    if (out.num_queries > 0) {
        double n = out.num_queries;
        out.rank1 = hit1 / n;
        out.rank5 = hit5 / n;
        out.rank10 = hit10 / n;
        out.rank20 = hit20 / n;
        out.map = sum_ap / n;
        out.minp = sum_inp / n;
    }
    return out;
}

}  // namespace uvireid
