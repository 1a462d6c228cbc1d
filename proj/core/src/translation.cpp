#include "uvireid/translation.hpp"

#include "uvireid/errors.hpp"

namespace uvireid {

using diff::Activation;
using diff::Network;
using diff::Tape;
using diff::TapedNet;
using diff::Var;

namespace {

// Generators start as a near-identity map (mirrored-relu pair plus jitter):
// a glorot tanh net squeezes every input into a narrow cone, which collapses
// the SFM votes before adversarial training can spread them. Starting from
// the identity makes translation a learned residual on top of the shared
// latent space.
Network make_generator(int dim, Rng& rng) {
    Network net({dim, 2 * dim, dim}, {Activation::Relu, Activation::Tanh}, rng);
    constexpr double kJitter = 0.02;
    diff::Tensor& w1 = net.layers()[0].weight;  // (2d x d)
    diff::Tensor& w2 = net.layers()[1].weight;  // (d x 2d)
    for (int i = 0; i < w1.size(); ++i) w1[i] = kJitter * (2.0 * rng.uniform() - 1.0);
    for (int i = 0; i < w2.size(); ++i) w2[i] = kJitter * (2.0 * rng.uniform() - 1.0);
    for (int i = 0; i < dim; ++i) {
        w1[i * dim + i] += 1.0;
        w1[(dim + i) * dim + i] += -1.0;
        w2[i * 2 * dim + i] += 1.0;
        w2[i * 2 * dim + dim + i] += -1.0;
    }
    return net;
}

}  // namespace

TranslationPair make_translation_pair(int dim, double clip, Rng& rng) {
    if (dim < 2) throw ConfigError("translation pair: dim must be >= 2");
    if (clip <= 0.0) throw ConfigError("translation pair: clip bound must be positive");
    TranslationPair pair;
    pair.gen_vi = make_generator(dim, rng);
    pair.gen_iv = make_generator(dim, rng);
    pair.critic_v = Network({dim, 2 * dim, 1}, {Activation::Relu, Activation::Linear}, rng);
    pair.critic_i = Network({dim, 2 * dim, 1}, {Activation::Relu, Activation::Linear}, rng);
    pair.clip = clip;
    return pair;
}

std::vector<double> translate(const Network& gen, std::span<const double> z) {
    diff::Tensor out = gen.apply(z);
    std::vector<double> v(out.data(), out.data() + out.size());
    l2_normalize_inplace(v);
    return v;
}

FeatureMatrix translate_all(const Network& gen, const FeatureMatrix& feats) {
    FeatureMatrix out(feats.dim);
    for (int i = 0; i < feats.rows(); ++i) out.append(translate(gen, feats.row(i)));
    return out;
}

Var translate(Tape& tape, const TapedNet& gen, Var z) { return tape.l2_normalize(gen(z)); }

Var cycle_loss(Tape& tape, const TapedNet& gen_vi, const TapedNet& gen_iv,
               const FeatureMatrix& batch_v, const FeatureMatrix& batch_i) {
    if (batch_v.rows() == 0 || batch_i.rows() == 0)
        throw ContractError("cycle_loss: batches must be non-empty");
    auto direction = [&](const FeatureMatrix& batch, const TapedNet& fwd, const TapedNet& back) {
        Var acc;
        for (int i = 0; i < batch.rows(); ++i) {
            Var z = tape.input(batch.row(i));
            Var round_trip = translate(tape, back, translate(tape, fwd, z));
            Var term = tape.sum(tape.abs(tape.sub(z, round_trip)));
            acc = i == 0 ? term : tape.add(acc, term);
        }
        return tape.scale(acc, 1.0 / batch.rows());
    };
    return tape.add(direction(batch_v, gen_vi, gen_iv), direction(batch_i, gen_iv, gen_vi));
}

double cycle_loss_value(const FeatureMatrix& batch_v, const FeatureMatrix& batch_i,
                        const TranslationPair& pair) {
    Tape tape;
    TapedNet gvi(tape, pair.gen_vi), giv(tape, pair.gen_iv);
    return cycle_loss(tape, gvi, giv, batch_v, batch_i).scalar_value();
}

namespace {
Var critic_score_mean(Tape& tape, const TapedNet& critic, const FeatureMatrix& batch) {
    Var acc;
    for (int i = 0; i < batch.rows(); ++i) {
        Var s = tape.pick(critic(tape.input(batch.row(i))), 0);
        acc = i == 0 ? s : tape.add(acc, s);
    }
    return tape.scale(acc, 1.0 / batch.rows());
}
}  // namespace

Var critic_loss(Tape& tape, const TapedNet& critic_v, const TapedNet& critic_i,
                const FeatureMatrix& real_v, const FeatureMatrix& real_i,
                const FeatureMatrix& fake_v, const FeatureMatrix& fake_i) {
    if (real_v.rows() == 0 || real_i.rows() == 0 || fake_v.rows() == 0 || fake_i.rows() == 0)
        throw ContractError("critic_loss: batches must be non-empty");
    Var estimate = tape.add(tape.sub(critic_score_mean(tape, critic_v, real_v),
                                     critic_score_mean(tape, critic_v, fake_v)),
                            tape.sub(critic_score_mean(tape, critic_i, real_i),
                                     critic_score_mean(tape, critic_i, fake_i)));
    return tape.scale(estimate, -1.0);
}

double critic_loss_value(const FeatureMatrix& batch_v, const FeatureMatrix& batch_i,
                         const TranslationPair& pair) {
    FeatureMatrix fake_i = translate_all(pair.gen_vi, batch_v);
    FeatureMatrix fake_v = translate_all(pair.gen_iv, batch_i);
    Tape tape;
    TapedNet cv(tape, pair.critic_v), ci(tape, pair.critic_i);
    return critic_loss(tape, cv, ci, batch_v, batch_i, fake_v, fake_i).scalar_value();
}

Var generator_adv_loss(Tape& tape, const TapedNet& gen_vi, const TapedNet& gen_iv,
                       const TapedNet& critic_v, const TapedNet& critic_i,
                       const FeatureMatrix& batch_v, const FeatureMatrix& batch_i,
                       Var* cycle_term) {
    if (batch_v.rows() == 0 || batch_i.rows() == 0)
        throw ContractError("generator_adv_loss: batches must be non-empty");
    Var cyc = cycle_loss(tape, gen_vi, gen_iv, batch_v, batch_i);
    if (cycle_term) *cycle_term = cyc;

    Var fake_i_score, fake_v_score;
    for (int i = 0; i < batch_v.rows(); ++i) {
        Var fake = translate(tape, gen_vi, tape.input(batch_v.row(i)));
        Var s = tape.pick(critic_i(fake), 0);
        fake_i_score = i == 0 ? s : tape.add(fake_i_score, s);
    }
    for (int i = 0; i < batch_i.rows(); ++i) {
        Var fake = translate(tape, gen_iv, tape.input(batch_i.row(i)));
        Var s = tape.pick(critic_v(fake), 0);
        fake_v_score = i == 0 ? s : tape.add(fake_v_score, s);
    }
    Var adv = tape.add(tape.scale(fake_i_score, -1.0 / batch_v.rows()),
                       tape.scale(fake_v_score, -1.0 / batch_i.rows()));
    return tape.add(cyc, adv);
}

double generator_adv_loss_value(const FeatureMatrix& batch_v, const FeatureMatrix& batch_i,
                                const TranslationPair& pair) {
    Tape tape;
    TapedNet gvi(tape, pair.gen_vi), giv(tape, pair.gen_iv);
    TapedNet cv(tape, pair.critic_v), ci(tape, pair.critic_i);
    return generator_adv_loss(tape, gvi, giv, cv, ci, batch_v, batch_i).scalar_value();
}

GanStepStats gan_step(TranslationPair& pair, const FeatureMatrix& batch_v,
                      const FeatureMatrix& batch_i, GanOptimizers& opts, int n_critic) {
    if (n_critic < 1) throw ConfigError("gan_step: n_critic must be >= 1");
    GanStepStats stats;

    auto critic_params = [&pair] {
        std::vector<diff::ParamRef> params = pair.critic_v.named_params();
        for (diff::ParamRef& p : pair.critic_i.named_params()) {
            p.name = "critic_i." + p.name;
            params.push_back(p);
        }
        return params;
    };

    for (int t = 0; t < n_critic; ++t) {
        FeatureMatrix fake_i = translate_all(pair.gen_vi, batch_v);
        FeatureMatrix fake_v = translate_all(pair.gen_iv, batch_i);
        Tape tape;
        TapedNet cv(tape, pair.critic_v), ci(tape, pair.critic_i);
        Var loss = critic_loss(tape, cv, ci, batch_v, batch_i, fake_v, fake_i);
        stats.wasserstein = -loss.scalar_value();
        auto grads = tape.backward(loss);
        std::vector<diff::Tensor> g = cv.gradients(grads);
        for (diff::Tensor& t2 : ci.gradients(grads)) g.push_back(std::move(t2));
        std::vector<diff::ParamRef> params = critic_params();
        opts.critics.step(params, g);
        pair.critic_v.clamp_params(pair.clip);
        pair.critic_i.clamp_params(pair.clip);
    }

    {
        Tape tape;
        TapedNet gvi(tape, pair.gen_vi), giv(tape, pair.gen_iv);
        TapedNet cv(tape, pair.critic_v), ci(tape, pair.critic_i);
        Var cyc;
        Var loss = generator_adv_loss(tape, gvi, giv, cv, ci, batch_v, batch_i, &cyc);
        stats.cycle = cyc.scalar_value();
        auto grads = tape.backward(loss);
        std::vector<diff::Tensor> g = gvi.gradients(grads);
        for (diff::Tensor& t2 : giv.gradients(grads)) g.push_back(std::move(t2));
        std::vector<diff::ParamRef> params = pair.gen_vi.named_params();
        for (diff::ParamRef& p : pair.gen_iv.named_params()) {
            p.name = "gen_iv." + p.name;
            params.push_back(p);
        }
        opts.generators.step(params, g);
    }
    return stats;
}

}  // namespace uvireid
