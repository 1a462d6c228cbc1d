#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "uvireid/finite_diff.hpp"
#include "uvireid/rng.hpp"
#include "uvireid/translation.hpp"

using namespace uvireid;
using diff::Network;
using diff::Tape;
using diff::TapedNet;
using diff::Tensor;
using diff::Var;

namespace {

FeatureMatrix random_batch(std::mt19937_64& rng, int n, int dim) {
    FeatureMatrix fm(dim);
    for (int i = 0; i < n; ++i) fm.append(oracle::random_unit_vec(rng, dim));
    return fm;
}

TranslationPair identity_pair(int dim) {
    TranslationPair pair;
    pair.gen_vi = Network::identity(dim);
    pair.gen_iv = Network::identity(dim);
    Rng rng(1);
    pair.critic_v = Network({dim, 2 * dim, 1},
                            {diff::Activation::Relu, diff::Activation::Linear}, rng);
    pair.critic_i = Network({dim, 2 * dim, 1},
                            {diff::Activation::Relu, diff::Activation::Linear}, rng);
    return pair;
}

void zero_net(Network& net) {
    for (auto& layer : net.layers()) {
        layer.weight.fill(0.0);
        layer.bias.fill(0.0);
    }
}

// Critic that returns the first coordinate: weight row e0 in a single
// linear layer.
Network projection_critic(int dim) {
    Network net = Network::identity(dim);
    Tensor w({1, dim});
    w[0] = 1.0;
    net.layers()[0].weight = w;
    net.layers()[0].bias = Tensor({1});
    return net;
}

}  // namespace

TEST_CASE("identity generator leaves unit vectors in place") {
    std::mt19937_64 rng(2);
    Network id = Network::identity(6);
    auto z = oracle::random_unit_vec(rng, 6);
    auto out = translate(id, z);
    for (int i = 0; i < 6; ++i) CHECK(out[static_cast<size_t>(i)] == doctest::Approx(z[static_cast<size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("translate matches a straight-line recompute") {
    Rng prng(5);
    TranslationPair pair = make_translation_pair(5, 0.01, prng);
    std::mt19937_64 rng(3);
    auto z = oracle::random_unit_vec(rng, 5);
    auto got = translate(pair.gen_vi, z);
    auto expected = oracle::normalized(oracle::mlp_forward(pair.gen_vi, z));
    for (int i = 0; i < 5; ++i) CHECK(got[static_cast<size_t>(i)] == doctest::Approx(expected[static_cast<size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("batch translation equals per-sample translation stacked") {
    Rng prng(6);
    TranslationPair pair = make_translation_pair(4, 0.01, prng);
    std::mt19937_64 rng(4);
    FeatureMatrix batch = random_batch(rng, 7, 4);
    FeatureMatrix out = translate_all(pair.gen_vi, batch);
    for (int i = 0; i < batch.rows(); ++i) {
        auto single = translate(pair.gen_vi, batch.row(i));
        for (int j = 0; j < 4; ++j) CHECK(out.row(i)[static_cast<size_t>(j)] == single[static_cast<size_t>(j)]);
    }
}

TEST_CASE("cycle loss vanishes for identity generators") {
    std::mt19937_64 rng(7);
    TranslationPair pair = identity_pair(5);
    FeatureMatrix bv = random_batch(rng, 4, 5), bi = random_batch(rng, 4, 5);
    CHECK(cycle_loss_value(bv, bi, pair) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("negating round trip costs 2 per unit basis vector") {
    // G_VI = -I, G_IV = I so both round trips negate.
    TranslationPair pair = identity_pair(4);
    for (int i = 0; i < 4; ++i) pair.gen_vi.layers()[0].weight[i * 4 + i] = -1.0;
    FeatureMatrix bv(4), bi(4);
    std::vector<double> e0{1.0, 0.0, 0.0, 0.0};
    bv.append(e0);
    bi.append(e0);
    // visible: ||e0 - (-e0)||_1 = 2; infrared round trip also negates
    CHECK(cycle_loss_value(bv, bi, pair) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("cycle loss matches a straight-line recompute on random generators") {
    Rng prng(8);
    TranslationPair pair = make_translation_pair(5, 0.01, prng);
    std::mt19937_64 rng(9);
    FeatureMatrix bv = random_batch(rng, 3, 5), bi = random_batch(rng, 2, 5);

    auto l1_roundtrip = [&](const FeatureMatrix& batch, const Network& fwd, const Network& back) {
        double total = 0;
        for (int i = 0; i < batch.rows(); ++i) {
            std::vector<double> z(batch.row(i).begin(), batch.row(i).end());
            auto mid = oracle::normalized(oracle::mlp_forward(fwd, z));
            auto rt = oracle::normalized(oracle::mlp_forward(back, mid));
            for (int j = 0; j < 5; ++j) total += std::fabs(z[static_cast<size_t>(j)] - rt[static_cast<size_t>(j)]);
        }
        return total / batch.rows();
    };
    double expected = l1_roundtrip(bv, pair.gen_vi, pair.gen_iv) +
                      l1_roundtrip(bi, pair.gen_iv, pair.gen_vi);
    CHECK(cycle_loss_value(bv, bi, pair) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero critics give zero critic loss") {
    std::mt19937_64 rng(10);
    TranslationPair pair = identity_pair(4);
    zero_net(pair.critic_v);
    zero_net(pair.critic_i);
    FeatureMatrix bv = random_batch(rng, 3, 4), bi = random_batch(rng, 3, 4);
    CHECK(critic_loss_value(bv, bi, pair) == doctest::Approx(0.0));
}

TEST_CASE("projection critics reproduce the hand-computed Wasserstein estimate") {
    TranslationPair pair = identity_pair(3);
    pair.critic_v = projection_critic(3);
    pair.critic_i = projection_critic(3);
    FeatureMatrix bv(3), bi(3);
    bv.append(oracle::normalized({0.8, 0.6, 0.0}));
    bv.append(oracle::normalized({0.0, 1.0, 0.0}));
    bi.append(oracle::normalized({-0.6, 0.8, 0.0}));
    bi.append(oracle::normalized({1.0, 0.0, 0.0}));
    // identity generators: fakes equal the opposite batch
    double mean_v = (0.8 + 0.0) / 2.0;
    double mean_i = (-0.6 + 1.0) / 2.0;
    double estimate = (mean_v - mean_i) + (mean_i - mean_v);
    CHECK(critic_loss_value(bv, bi, pair) == doctest::Approx(-estimate).epsilon(1e-12));
}

TEST_CASE("critic weights respect the clamp after a gan step") {
    Rng prng(11);
    TranslationPair pair = make_translation_pair(4, 0.01, prng);
    std::mt19937_64 rng(12);
    FeatureMatrix bv = random_batch(rng, 6, 4), bi = random_batch(rng, 6, 4);
    GanOptimizers opts{diff::Optimizer(diff::OptKind::Adam, 1e-3),
                       diff::Optimizer(diff::OptKind::Adam, 1e-3)};
    gan_step(pair, bv, bi, opts, 3);
    for (const Network* critic : {&pair.critic_v, &pair.critic_i})
        for (const auto& layer : critic->layers()) {
            for (int i = 0; i < layer.weight.size(); ++i) CHECK(std::fabs(layer.weight[i]) <= 0.01);
            for (int i = 0; i < layer.bias.size(); ++i) CHECK(std::fabs(layer.bias[i]) <= 0.01);
        }
}

TEST_CASE("generator adversarial loss reduces to cycle loss under zero critics") {
    Rng prng(13);
    TranslationPair pair = make_translation_pair(4, 0.01, prng);
    zero_net(pair.critic_v);
    zero_net(pair.critic_i);
    std::mt19937_64 rng(14);
    FeatureMatrix bv = random_batch(rng, 3, 4), bi = random_batch(rng, 3, 4);
    CHECK(generator_adv_loss_value(bv, bi, pair) ==
          doctest::Approx(cycle_loss_value(bv, bi, pair)).epsilon(1e-12));
}

TEST_CASE("identity generators plus zero critics give exactly zero") {
    TranslationPair pair = identity_pair(4);
    zero_net(pair.critic_v);
    zero_net(pair.critic_i);
    std::mt19937_64 rng(15);
    FeatureMatrix bv = random_batch(rng, 2, 4), bi = random_batch(rng, 2, 4);
    CHECK(generator_adv_loss_value(bv, bi, pair) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("generator adversarial gradient passes finite differences") {
    Rng prng(16);
    TranslationPair pair = make_translation_pair(3, 0.01, prng);
    std::mt19937_64 rng(17);
    FeatureMatrix bv = random_batch(rng, 2, 3), bi = random_batch(rng, 2, 3);

    auto wrt_gvi_w0 = [&](Tape& t, Var w0) {
        // rebuild gen_vi with w0 as the differentiated leaf
        Var b0 = t.input(pair.gen_vi.layers()[0].bias);
        Var w1 = t.input(pair.gen_vi.layers()[1].weight);
        Var b1 = t.input(pair.gen_vi.layers()[1].bias);
        TapedNet giv(t, pair.gen_iv), cv(t, pair.critic_v), ci(t, pair.critic_i);
        auto apply_gvi = [&](Var z) {
            Var h = t.relu(t.add(t.matvec(w0, z), b0));
            return t.l2_normalize(t.tanh(t.add(t.matvec(w1, h), b1)));
        };
        Var acc;
        for (int i = 0; i < bv.rows(); ++i) {
            Var z = t.input(bv.row(i));
            Var mid = apply_gvi(z);
            Var rt = t.l2_normalize(giv(mid));
            Var cyc = t.sum(t.abs(t.sub(z, rt)));
            Var adv = t.scale(t.pick(ci(mid), 0), -1.0);
            Var term = t.add(cyc, adv);
            acc = i == 0 ? term : t.add(acc, term);
        }
        for (int i = 0; i < bi.rows(); ++i) {
            Var z = t.input(bi.row(i));
            Var mid = t.l2_normalize(giv(z));
            Var rt = apply_gvi(mid);
            Var cyc = t.sum(t.abs(t.sub(z, rt)));
            Var adv = t.scale(t.pick(cv(mid), 0), -1.0);
            acc = t.add(acc, t.add(cyc, adv));
        }
        return t.scale(acc, 1.0 / (bv.rows() + bi.rows()));
    };
    CHECK(diff::finite_diff_check(wrt_gvi_w0, pair.gen_vi.layers()[0].weight) < 1e-4);
}

TEST_CASE("gan_step with zero effective learning rate changes nothing") {
    Rng prng(18);
    TranslationPair pair = make_translation_pair(4, 0.01, prng);
    TranslationPair before = pair;
    std::mt19937_64 rng(19);
    FeatureMatrix bv = random_batch(rng, 4, 4), bi = random_batch(rng, 4, 4);
    diff::Schedule frozen;
    frozen.warmup_steps = 1000000;  // warm-up fraction stays ~0
    GanOptimizers opts{diff::Optimizer(diff::OptKind::Adam, 1e-3, frozen),
                       diff::Optimizer(diff::OptKind::Adam, 1e-3, frozen)};
    gan_step(pair, bv, bi, opts, 1);
    auto same = [](const Network& a, const Network& b) {
        for (size_t l = 0; l < a.layers().size(); ++l) {
            for (int i = 0; i < a.layers()[l].weight.size(); ++i)
                if (a.layers()[l].weight[i] != b.layers()[l].weight[i]) return false;
            for (int i = 0; i < a.layers()[l].bias.size(); ++i)
                if (a.layers()[l].bias[i] != b.layers()[l].bias[i]) return false;
        }
        return true;
    };
    CHECK(same(pair.gen_vi, before.gen_vi));
    CHECK(same(pair.gen_iv, before.gen_iv));
    // critics were clamped but a zero step keeps weights within the clamp
    CHECK(same(pair.critic_v, before.critic_v) ==
          false);  // clamp still applies to the fresh glorot weights
}

TEST_CASE("generator step leaves critics untouched and vice versa") {
    Rng prng(20);
    TranslationPair pair = make_translation_pair(4, 0.01, prng);
    std::mt19937_64 rng(21);
    FeatureMatrix bv = random_batch(rng, 4, 4), bi = random_batch(rng, 4, 4);

    // Freeze the critic optimizer only; generator optimizer live.
    diff::Schedule frozen;
    frozen.warmup_steps = 1000000;
    GanOptimizers opts{diff::Optimizer(diff::OptKind::Adam, 1e-3),
                       diff::Optimizer(diff::OptKind::Adam, 1e-3, frozen)};
    pair.critic_v.clamp_params(pair.clip);
    pair.critic_i.clamp_params(pair.clip);
    TranslationPair before = pair;
    gan_step(pair, bv, bi, opts, 1);
    // critics: zero critic lr + already clamped -> bitwise identical
    for (size_t l = 0; l < pair.critic_v.layers().size(); ++l)
        for (int i = 0; i < pair.critic_v.layers()[l].weight.size(); ++i)
            CHECK(pair.critic_v.layers()[l].weight[i] == before.critic_v.layers()[l].weight[i]);
    // generators moved
    bool moved = false;
    for (int i = 0; i < pair.gen_vi.layers()[0].weight.size() && !moved; ++i)
        moved = pair.gen_vi.layers()[0].weight[i] != before.gen_vi.layers()[0].weight[i];
    CHECK(moved);
}

TEST_CASE("gan_step diagnostics are deterministic for a fixed seed") {
    auto run = [] {
        Rng prng(22);
        TranslationPair pair = make_translation_pair(4, 0.01, prng);
        std::mt19937_64 rng(23);
        FeatureMatrix bv = random_batch(rng, 5, 4), bi = random_batch(rng, 5, 4);
        GanOptimizers opts{diff::Optimizer(diff::OptKind::Adam, 1e-3),
                           diff::Optimizer(diff::OptKind::Adam, 1e-3)};
        GanStepStats last{};
        for (int i = 0; i < 10; ++i) last = gan_step(pair, bv, bi, opts, 2);
        return last;
    };
    GanStepStats a = run(), b = run();
    CHECK(a.cycle == b.cycle);
    CHECK(a.wasserstein == b.wasserstein);
}

TEST_CASE("on an offset two-blob toy the Wasserstein estimate shrinks") {
    // visible = infrared + constant offset; generators should learn the
    // shift and starve the critics. The estimate only means something once
    // the critics have warmed up, so the start window skips the first steps.
    std::vector<double> end_minus_start;
    std::vector<double> cycle_delta;
    for (uint64_t seed : {31ull, 32ull, 33ull, 34ull, 35ull}) {
        Rng prng(seed);
        TranslationPair pair = make_translation_pair(6, 0.1, prng);
        std::mt19937_64 rng(seed * 7 + 1);
        std::vector<double> offset = oracle::random_unit_vec(rng, 6);
        FeatureMatrix bv(6), bi(6);
        for (int i = 0; i < 16; ++i) {
            auto z = oracle::random_unit_vec(rng, 6);
            bi.append(z);
            std::vector<double> shifted = z;
            for (int j = 0; j < 6; ++j) shifted[static_cast<size_t>(j)] += 0.8 * offset[static_cast<size_t>(j)];
            bv.append(oracle::normalized(shifted));
        }
        GanOptimizers opts{diff::Optimizer(diff::OptKind::Adam, 5e-3),
                           diff::Optimizer(diff::OptKind::Adam, 5e-3)};
        double start = 0, end = 0, cyc_start = 0, cyc_end = 0;
        for (int step = 0; step < 220; ++step) {
            GanStepStats stats = gan_step(pair, bv, bi, opts, 5);
            if (step >= 20 && step < 40) {
                start += stats.wasserstein / 20.0;
                cyc_start += stats.cycle / 20.0;
            }
            if (step >= 200) {
                end += stats.wasserstein / 20.0;
                cyc_end += stats.cycle / 20.0;
            }
        }
        end_minus_start.push_back(end - start);
        cycle_delta.push_back(cyc_end - cyc_start);
    }
    std::sort(end_minus_start.begin(), end_minus_start.end());
    std::sort(cycle_delta.begin(), cycle_delta.end());
    CHECK(end_minus_start[2] < 0.0);  // 5-seed median decreases
    CHECK(cycle_delta[2] < 0.0);
}
