#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "uvireid/dbscan.hpp"
#include "uvireid/errors.hpp"
#include "uvireid/matching.hpp"
#include "uvireid/rng.hpp"
#include "uvireid/trainer.hpp"

using namespace uvireid;
using diff::Network;

namespace {

MemoryBank bank_from(const std::vector<std::vector<double>>& centroids,
                     Modality m = Modality::Infrared) {
    MemoryBank bank(static_cast<int>(centroids.front().size()), m, BankKind::Real, 0.2);
    for (const auto& c : centroids) bank.push_centroid(c);
    return bank;
}

std::vector<double> axis(int dim, int i, double v = 1.0) {
    std::vector<double> out(static_cast<size_t>(dim), 0.0);
    out[static_cast<size_t>(i)] = v;
    return out;
}

}  // namespace

TEST_CASE("all features identical to one centroid vote for it") {
    MemoryBank tgt = bank_from({axis(4, 0), axis(4, 1), axis(4, 2)});
    FeatureMatrix feats(4);
    for (int i = 0; i < 5; ++i) feats.append(axis(4, 1));
    auto votes = vote_assign(feats, tgt);
    CHECK(votes == std::vector<int>{0, 5, 0});
}

TEST_CASE("vote counting splits by nearest centroid") {
    MemoryBank tgt = bank_from({axis(4, 0), axis(4, 1), axis(4, 2)});
    FeatureMatrix feats(4);
    feats.append(oracle::normalized({0.9, 0.1, 0.0, 0.0}));
    feats.append(oracle::normalized({0.8, 0.0, 0.2, 0.0}));
    feats.append(oracle::normalized({0.1, 0.0, 0.9, 0.0}));
    auto votes = vote_assign(feats, tgt);
    CHECK(votes == std::vector<int>{2, 0, 1});
}

TEST_CASE("random votes agree with an exhaustive nearest-neighbor oracle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<double>> cents;
        for (int k = 0; k < 6; ++k) cents.push_back(oracle::random_unit_vec(rng, 7));
        MemoryBank tgt = bank_from(cents);
        FeatureMatrix feats(7);
        std::vector<int> expected(6, 0);
        for (int i = 0; i < 30; ++i) {
            auto f = oracle::random_unit_vec(rng, 7);
            feats.append(f);
            int best = 0;
            double best_sim = oracle::dotv(f, cents[0]);
            for (int k = 1; k < 6; ++k) {
                double s = oracle::dotv(f, cents[static_cast<size_t>(k)]);
                if (s > best_sim) {
                    best_sim = s;
                    best = k;
                }
            }
            ++expected[static_cast<size_t>(best)];
        }
        CHECK(vote_assign(feats, tgt) == expected);
    }
}

TEST_CASE("a single cluster on each side is matched to itself") {
    FeatureMatrix all(3);
    all.append(axis(3, 0));
    all.append(axis(3, 0));
    MemoryBank src = bank_from({axis(3, 0)}, Modality::Visible);
    MemoryBank tgt = bank_from({axis(3, 0)});
    DirectionMatch m =
        sfm_match_direction(all, {{0, 1}}, Network::identity(3), src, tgt, 2);
    CHECK(m.match == std::vector<int>{0});
    CHECK(m.evidence[0].votes == 2);
    CHECK(m.evidence[0].runner_votes == 0);
}

TEST_CASE("equal votes fall back to centroid similarity") {
    // Two candidates get equal votes; the source centroid is much closer to
    // candidate 0, which must win regardless of index order.
    int d = 6;
    std::vector<double> src_dir = axis(d, 0);
    std::vector<double> cand_a = oracle::normalized({0.9, 0.1, 0.0, 0.0, 0.0, 0.0});
    std::vector<double> cand_b = oracle::normalized({0.2, 0.0, 0.9, 0.0, 0.0, 0.0});
    MemoryBank tgt = bank_from({cand_a, cand_b});
    MemoryBank src = bank_from({src_dir}, Modality::Visible);
    // Two members: one lands on A, one on B (identity generator).
    FeatureMatrix all(d);
    all.append(oracle::normalized({0.89, 0.12, 0.01, 0.0, 0.0, 0.0}));  // votes A
    all.append(oracle::normalized({0.21, 0.0, 0.89, 0.0, 0.0, 0.0}));   // votes B
    DirectionMatch m =
        sfm_match_direction(all, {{0, 1}}, Network::identity(d), src, tgt, 2);
    CHECK(m.match == std::vector<int>{0});
    CHECK(m.evidence[0].votes == 1);
    CHECK(m.evidence[0].runner_votes == 1);
    CHECK(m.evidence[0].cosine == doctest::Approx(oracle::dotv(src_dir, cand_a)));
}

TEST_CASE("runner-up by votes wins when it is more similar to the source") {
    // Candidate B collects more votes, but the source centroid is far more
    // similar to candidate A: the two-stage filter must pick A.
    int d = 6;
    std::vector<double> src_dir = axis(d, 0);
    std::vector<double> cand_a = oracle::normalized({0.95, 0.0, 0.0, 0.3122, 0.0, 0.0});
    std::vector<double> cand_b = axis(d, 2);
    MemoryBank tgt = bank_from({cand_b, cand_a});  // B at index 0
    MemoryBank src = bank_from({src_dir}, Modality::Visible);
    FeatureMatrix all(d);
    all.append(axis(d, 2));                                    // votes B
    all.append(oracle::normalized({0.1, 0.0, 0.95, 0.0, 0.0, 0.0}));  // votes B
    all.append(oracle::normalized({0.95, 0.0, 0.1, 0.0, 0.0, 0.0}));  // votes A
    DirectionMatch m =
        sfm_match_direction(all, {{0, 1, 2}}, Network::identity(d), src, tgt, 2);
    CHECK(m.match == std::vector<int>{1});  // A despite fewer votes
    CHECK(m.evidence[0].votes == 1);
    CHECK(m.evidence[0].runner_votes == 2);
}

TEST_CASE("empty source cluster is a contract error") {
    FeatureMatrix all(3);
    all.append(axis(3, 0));
    MemoryBank src = bank_from({axis(3, 0), axis(3, 1)}, Modality::Visible);
    MemoryBank tgt = bank_from({axis(3, 0)});
    CHECK_THROWS_AS(
        sfm_match_direction(all, {{0}, {}}, Network::identity(3), src, tgt, 2),
        ContractError);
}

TEST_CASE("vote evidence is conserved over source members") {
    std::mt19937_64 rng(11);
    GenSpec spec;
    spec.num_identities = 5;
    spec.samples_per_identity = 8;
    spec.dim = 16;
    spec.sigma_id = 0.05;
    spec.delta_mod = 0.2;
    spec.seed = 31;
    EmbeddingDataset ds = generate(spec);
    std::vector<int> v_rows = ds.originals(Modality::Visible);
    std::vector<int> i_rows = ds.originals(Modality::Infrared);
    FeatureMatrix all = ds.features_of(std::vector<int>(ds.size()));
    // features_of wants indices; build the identity index list
    std::vector<int> idx(static_cast<size_t>(ds.size()));
    for (int i = 0; i < ds.size(); ++i) idx[static_cast<size_t>(i)] = i;
    all = ds.features_of(idx);

    PseudoLabeling lv = dbscan(ds.features_of(v_rows), 0.4, 3);
    PseudoLabeling li = dbscan(ds.features_of(i_rows), 0.4, 3);
    REQUIRE(lv.num_clusters >= 2);
    DatasetLabels labels = relabel(ds, lv, li, v_rows, i_rows);
    MemoryBank bank_v = MemoryBank::init(all, labels.members_visible, Modality::Visible, 0.2);
    MemoryBank bank_i = MemoryBank::init(all, labels.members_infrared, Modality::Infrared, 0.2);
    TranslationPair pair;
    pair.gen_vi = Network::identity(16);
    pair.gen_iv = Network::identity(16);
    MatchTable table = sfm_match(all, labels, pair, bank_v, bank_i, 2);

    REQUIRE(table.v_to_i.size() == labels.members_visible.size());
    for (size_t c = 0; c < table.v_to_i.size(); ++c) {
        // winner + runner votes can never exceed the member count
        CHECK(table.v_evidence[c].votes + table.v_evidence[c].runner_votes <=
              static_cast<int>(labels.members_visible[c].size()));
        CHECK(table.v_evidence[c].votes >= 1);
    }
}

TEST_CASE("sfm is invariant to member order within a cluster") {
    std::mt19937_64 rng(13);
    std::vector<std::vector<double>> cents;
    for (int k = 0; k < 3; ++k) cents.push_back(oracle::random_unit_vec(rng, 8));
    MemoryBank tgt = bank_from(cents);
    MemoryBank src = bank_from({oracle::random_unit_vec(rng, 8)}, Modality::Visible);
    FeatureMatrix all(8);
    std::vector<int> members;
    for (int i = 0; i < 9; ++i) {
        all.append(oracle::random_unit_vec(rng, 8));
        members.push_back(i);
    }
    DirectionMatch a = sfm_match_direction(all, {members}, Network::identity(8), src, tgt, 2);
    std::shuffle(members.begin(), members.end(), rng);
    DirectionMatch b = sfm_match_direction(all, {members}, Network::identity(8), src, tgt, 2);
    CHECK(a.match == b.match);
    CHECK(a.evidence[0].votes == b.evidence[0].votes);
}

TEST_CASE("identity generators and identical banks give the identity match") {
    std::mt19937_64 rng(17);
    std::vector<std::vector<double>> cents;
    FeatureMatrix all(10);
    std::vector<std::vector<int>> members;
    for (int k = 0; k < 4; ++k) {
        auto c = oracle::random_unit_vec(rng, 10);
        cents.push_back(c);
        members.push_back({k});
        all.append(c);
    }
    DatasetLabels labels;
    labels.k_visible = labels.k_infrared = 4;
    labels.members_visible = members;
    labels.members_infrared = members;
    MemoryBank bank_v = bank_from(cents, Modality::Visible);
    MemoryBank bank_i = bank_from(cents, Modality::Infrared);
    TranslationPair pair;
    pair.gen_vi = Network::identity(10);
    pair.gen_iv = Network::identity(10);
    MatchTable table = sfm_match(all, labels, pair, bank_v, bank_i, 2);
    for (int k = 0; k < 4; ++k) {
        CHECK(table.v_to_i[static_cast<size_t>(k)] == k);
        CHECK(table.i_to_v[static_cast<size_t>(k)] == k);
    }
}

TEST_CASE("sfm recovers ground-truth correspondence at small modality gap") {
    std::vector<double> accuracies;
    for (uint64_t seed : {41ull, 42ull, 43ull, 44ull, 45ull}) {
        GenSpec spec;
        spec.num_identities = 10;
        spec.samples_per_identity = 10;
        spec.dim = 24;
        spec.sigma_id = 0.05;
        spec.delta_mod = 0.25;
        spec.sigma_aug = 0.0;
        spec.seed = seed;
        EmbeddingDataset ds = generate(spec);
        std::vector<int> idx(static_cast<size_t>(ds.size()));
        for (int i = 0; i < ds.size(); ++i) idx[static_cast<size_t>(i)] = i;
        FeatureMatrix all = ds.features_of(idx);
        std::vector<int> v_rows = ds.originals(Modality::Visible);
        std::vector<int> i_rows = ds.originals(Modality::Infrared);
        PseudoLabeling lv = dbscan(ds.features_of(v_rows), 0.35, 3);
        PseudoLabeling li = dbscan(ds.features_of(i_rows), 0.35, 3);
        DatasetLabels labels = relabel(ds, lv, li, v_rows, i_rows);
        MemoryBank bank_v = MemoryBank::init(all, labels.members_visible, Modality::Visible, 0.2);
        MemoryBank bank_i = MemoryBank::init(all, labels.members_infrared, Modality::Infrared, 0.2);
        TranslationPair pair;
        pair.gen_vi = Network::identity(24);
        pair.gen_iv = Network::identity(24);
        MatchTable table = sfm_match(all, labels, pair, bank_v, bank_i, 2);
        double acc = 0.5 * (Trainer::direction_accuracy(ds, labels.members_visible,
                                                        labels.members_infrared, table.v_to_i) +
                            Trainer::direction_accuracy(ds, labels.members_infrared,
                                                        labels.members_visible, table.i_to_v));
        accuracies.push_back(acc);
    }
    std::sort(accuracies.begin(), accuracies.end());
    CHECK(accuracies[2] >= 0.95);
}

TEST_CASE("greedy matching: identity case and hand trace") {
    std::mt19937_64 rng(19);
    std::vector<std::vector<double>> cents;
    for (int k = 0; k < 3; ++k) cents.push_back(oracle::random_unit_vec(rng, 6));
    MemoryBank bank_v = bank_from(cents, Modality::Visible);
    MemoryBank bank_i = bank_from(cents, Modality::Infrared);
    MatchTable id_match = greedy_match(bank_v, bank_i);
    for (int k = 0; k < 3; ++k) {
        CHECK(id_match.v_to_i[static_cast<size_t>(k)] == k);
        CHECK(id_match.i_to_v[static_cast<size_t>(k)] == k);
    }

    // Hand 2x2 similarity [[0.9, 0.1], [0.8, 0.7]]: greedy pairs (0,0) first,
    // then (1,1). Targets with mutual cosine 0.5 make all four similarities
    // realizable on the sphere.
    std::vector<double> t0 = axis(4, 0);
    std::vector<double> t1 = oracle::normalized({0.5, std::sqrt(0.75), 0.0, 0.0});
    auto source_with_sims = [&](double to_t0, double to_t1, int spare_axis) {
        double rho = oracle::dotv(t0, t1);
        double det = 1.0 - rho * rho;
        double c0 = (to_t0 - to_t1 * rho) / det;
        double c1 = (to_t1 - to_t0 * rho) / det;
        std::vector<double> s(4, 0.0);
        for (int j = 0; j < 4; ++j)
            s[static_cast<size_t>(j)] = c0 * t0[static_cast<size_t>(j)] + c1 * t1[static_cast<size_t>(j)];
        double norm2 = oracle::dotv(s, s);
        REQUIRE(norm2 <= 1.0);
        s[static_cast<size_t>(spare_axis)] = std::sqrt(1.0 - norm2);
        return s;
    };
    MemoryBank sv(4, Modality::Visible, BankKind::Real, 0.2);
    sv.push_centroid(source_with_sims(0.9, 0.1, 2));
    sv.push_centroid(source_with_sims(0.8, 0.7, 3));
    MemoryBank st(4, Modality::Infrared, BankKind::Real, 0.2);
    st.push_centroid(t0);
    st.push_centroid(t1);
    MatchTable table = greedy_match(sv, st);
    CHECK(table.v_to_i == std::vector<int>{0, 1});
    CHECK(table.v_evidence[0].cosine == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(table.v_evidence[1].cosine == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("greedy with more sources than targets reuses targets") {
    std::mt19937_64 rng(23);
    std::vector<std::vector<double>> src_c, tgt_c;
    for (int k = 0; k < 5; ++k) src_c.push_back(oracle::random_unit_vec(rng, 6));
    for (int k = 0; k < 2; ++k) tgt_c.push_back(oracle::random_unit_vec(rng, 6));
    MatchTable table = greedy_match(bank_from(src_c, Modality::Visible), bank_from(tgt_c));
    CHECK(table.v_to_i.size() == 5);
    for (int t : table.v_to_i) {
        CHECK(t >= 0);
        CHECK(t < 2);
    }
}

TEST_CASE("match table CSV has the documented shape") {
    std::mt19937_64 rng(29);
    std::vector<std::vector<double>> cents;
    for (int k = 0; k < 2; ++k) cents.push_back(oracle::random_unit_vec(rng, 4));
    MatchTable table = greedy_match(bank_from(cents, Modality::Visible), bank_from(cents));
    std::ostringstream os;
    write_match_csv(os, table);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "direction,src,dst,votes,runner_votes,cosine");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 4);  // 2 per direction
}
