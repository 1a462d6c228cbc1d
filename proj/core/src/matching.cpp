#include "uvireid/matching.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "uvireid/errors.hpp"

namespace uvireid {

std::vector<int> vote_assign(const FeatureMatrix& pseudo_feats, const MemoryBank& target) {
    if (pseudo_feats.rows() == 0) throw ContractError("vote_assign: empty feature list");
    std::vector<int> counts(static_cast<size_t>(target.size()), 0);
    for (int i = 0; i < pseudo_feats.rows(); ++i) {
        auto f = pseudo_feats.row(i);
        int best = 0;
        double best_sim = dot(target.centroid(0), f);
        for (int k = 1; k < target.size(); ++k) {
            double s = dot(target.centroid(k), f);
            if (s > best_sim) {  // ties keep the lower index
                best_sim = s;
                best = k;
            }
        }
        ++counts[static_cast<size_t>(best)];
    }
    return counts;
}

DirectionMatch sfm_match_direction(const FeatureMatrix& all_feats,
                                   const std::vector<std::vector<int>>& src_members,
                                   const diff::Network& gen, const MemoryBank& src_bank,
                                   const MemoryBank& tgt_bank, int shortlist) {
    if (src_bank.size() == 0 || tgt_bank.size() == 0)
        throw ContractError("sfm_match_direction: banks must be non-empty");
    if (static_cast<int>(src_members.size()) != src_bank.size())
        throw ContractError("sfm_match_direction: member list / bank size mismatch");
    if (shortlist < 1) throw ConfigError("sfm_match_direction: shortlist must be >= 1");

    DirectionMatch out;
    for (size_t c = 0; c < src_members.size(); ++c) {
        if (src_members[c].empty())
            throw ContractError("sfm_match_direction: source cluster " + std::to_string(c) +
                                " has no members");
        FeatureMatrix translated(all_feats.dim);
        for (int idx : src_members[c]) translated.append(translate(gen, all_feats.row(idx)));
        std::vector<int> votes = vote_assign(translated, tgt_bank);

        // Shortlist by votes (ties -> lower index), dropping unvoted slots.
        std::vector<int> order(votes.size());
        for (size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return votes[static_cast<size_t>(a)] > votes[static_cast<size_t>(b)]; });
        std::vector<int> candidates;
        for (int k : order) {
            if (static_cast<int>(candidates.size()) >= shortlist) break;
            if (votes[static_cast<size_t>(k)] == 0 && !candidates.empty()) break;
            candidates.push_back(k);
        }

        auto src_centroid = src_bank.centroid(static_cast<int>(c));
        int winner = candidates[0];
        double winner_sim = dot(tgt_bank.centroid(winner), src_centroid);
        for (size_t ci = 1; ci < candidates.size(); ++ci) {
            int cand = candidates[ci];
            double sim = dot(tgt_bank.centroid(cand), src_centroid);
            bool better = sim > winner_sim;
            if (sim == winner_sim) {
                int vw = votes[static_cast<size_t>(winner)], vc = votes[static_cast<size_t>(cand)];
                better = vc > vw || (vc == vw && cand < winner);
            }
            if (better) {
                winner = cand;
                winner_sim = sim;
            }
        }

        MatchEvidence ev;
        ev.votes = votes[static_cast<size_t>(winner)];
        ev.cosine = winner_sim;
        for (int cand : candidates)
            if (cand != winner) ev.runner_votes = std::max(ev.runner_votes, votes[static_cast<size_t>(cand)]);
        out.match.push_back(winner);
        out.evidence.push_back(ev);
    }
    return out;
}

MatchTable sfm_match(const FeatureMatrix& all_feats, const DatasetLabels& labels,
                     const TranslationPair& pair, const MemoryBank& bank_v,
                     const MemoryBank& bank_i, int shortlist) {
    MatchTable table;
    DirectionMatch v2i = sfm_match_direction(all_feats, labels.members_visible, pair.gen_vi,
                                             bank_v, bank_i, shortlist);
    DirectionMatch i2v = sfm_match_direction(all_feats, labels.members_infrared, pair.gen_iv,
                                             bank_i, bank_v, shortlist);
    table.v_to_i = std::move(v2i.match);
    table.v_evidence = std::move(v2i.evidence);
    table.i_to_v = std::move(i2v.match);
    table.i_evidence = std::move(i2v.evidence);
    return table;
}

namespace {

void greedy_direction(const MemoryBank& src, const MemoryBank& tgt, std::vector<int>& match,
                      std::vector<MatchEvidence>& evidence) {
    int ks = src.size(), kt = tgt.size();
    match.assign(static_cast<size_t>(ks), -1);
    evidence.assign(static_cast<size_t>(ks), {});
    std::vector<bool> src_used(static_cast<size_t>(ks), false), tgt_used(static_cast<size_t>(kt), false);
    int pairs = std::min(ks, kt);
    for (int step = 0; step < pairs; ++step) {
        int best_s = -1, best_t = -1;
        double best_sim = -2.0;
        for (int s = 0; s < ks; ++s) {
            if (src_used[static_cast<size_t>(s)]) continue;
            for (int t = 0; t < kt; ++t) {
                if (tgt_used[static_cast<size_t>(t)]) continue;
                double sim = dot(src.centroid(s), tgt.centroid(t));
                if (sim > best_sim) {
                    best_sim = sim;
                    best_s = s;
                    best_t = t;
                }
            }
        }
        src_used[static_cast<size_t>(best_s)] = true;
        tgt_used[static_cast<size_t>(best_t)] = true;
        match[static_cast<size_t>(best_s)] = best_t;
        evidence[static_cast<size_t>(best_s)].cosine = best_sim;
    }
    // Surplus sources reuse their nearest target.
    for (int s = 0; s < ks; ++s) {
        if (match[static_cast<size_t>(s)] >= 0) continue;
        int best_t = 0;
        double best_sim = dot(src.centroid(s), tgt.centroid(0));
        for (int t = 1; t < kt; ++t) {
            double sim = dot(src.centroid(s), tgt.centroid(t));
            if (sim > best_sim) {
                best_sim = sim;
                best_t = t;
            }
        }
        match[static_cast<size_t>(s)] = best_t;
        evidence[static_cast<size_t>(s)].cosine = best_sim;
    }
}

}  // namespace

MatchTable greedy_match(const MemoryBank& bank_v, const MemoryBank& bank_i) {
    if (bank_v.size() == 0 || bank_i.size() == 0)
        throw ContractError("greedy_match: banks must be non-empty");
    MatchTable table;
    greedy_direction(bank_v, bank_i, table.v_to_i, table.v_evidence);
    greedy_direction(bank_i, bank_v, table.i_to_v, table.i_evidence);
    return table;
}

void write_match_csv(std::ostream& os, const MatchTable& table) {
    os << "direction,src,dst,votes,runner_votes,cosine\n";
    char buf[32];
    auto emit = [&](const char* dir, const std::vector<int>& match,
                    const std::vector<MatchEvidence>& ev) {
        for (size_t s = 0; s < match.size(); ++s) {
            std::snprintf(buf, sizeof buf, "%.9f", ev[s].cosine);
            os << dir << ',' << s << ',' << match[s] << ',' << ev[s].votes << ','
               << ev[s].runner_votes << ',' << buf << '\n';
        }
    };
    emit("V2I", table.v_to_i, table.v_evidence);
    emit("I2V", table.i_to_v, table.i_evidence);
}

}  // namespace uvireid
