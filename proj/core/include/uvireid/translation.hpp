#pragma once

#include <span>
#include <vector>

#include "uvireid/features.hpp"
#include "uvireid/network.hpp"
#include "uvireid/optimizer.hpp"
#include "uvireid/rng.hpp"
#include "uvireid/tape.hpp"

namespace uvireid {

// Bidirectional latent translators plus Wasserstein critics. Critic weights
// are clipped into [-clip, clip] after every critic update.
struct TranslationPair {
    diff::Network gen_vi;    // visible -> pseudo infrared
    diff::Network gen_iv;    // infrared -> pseudo visible
    diff::Network critic_v;  // scalar score for visible-space features
    diff::Network critic_i;
    double clip = 0.01;
};

// Generators: d -> 2d relu -> d tanh, renormalized on use.
// Critics:    d -> 2d relu -> 1 linear.
TranslationPair make_translation_pair(int dim, double clip, Rng& rng);

// z -> normalize(gen(z)). All similarity math downstream is cosine, so
// translated features stay on the sphere.
std::vector<double> translate(const diff::Network& gen, std::span<const double> z);
FeatureMatrix translate_all(const diff::Network& gen, const FeatureMatrix& feats);
diff::Var translate(diff::Tape& tape, const diff::TapedNet& gen, diff::Var z);

// Mean L1 round-trip error, both directions:
//   mean_v ||z - G_IV(G_VI(z))||_1 + mean_i ||z - G_VI(G_IV(z))||_1
diff::Var cycle_loss(diff::Tape& tape, const diff::TapedNet& gen_vi, const diff::TapedNet& gen_iv,
                     const FeatureMatrix& batch_v, const FeatureMatrix& batch_i);
double cycle_loss_value(const FeatureMatrix& batch_v, const FeatureMatrix& batch_i,
                        const TranslationPair& pair);

// Negated Wasserstein estimate; minimizing it maximizes
//   D_V(Z^V) - D_V(G_IV(Z^I)) + D_I(Z^I) - D_I(G_VI(Z^V)).
// Fakes enter as constants so only critic parameters receive gradients.
diff::Var critic_loss(diff::Tape& tape, const diff::TapedNet& critic_v,
                      const diff::TapedNet& critic_i, const FeatureMatrix& real_v,
                      const FeatureMatrix& real_i, const FeatureMatrix& fake_v,
                      const FeatureMatrix& fake_i);
double critic_loss_value(const FeatureMatrix& batch_v, const FeatureMatrix& batch_i,
                         const TranslationPair& pair);

// cycle_loss - mean D_I(G_VI(z_v)) - mean D_V(G_IV(z_i)); the trainer steps
// generator parameters only. cycle_term, when given, receives the cycle node.
diff::Var generator_adv_loss(diff::Tape& tape, const diff::TapedNet& gen_vi,
                             const diff::TapedNet& gen_iv, const diff::TapedNet& critic_v,
                             const diff::TapedNet& critic_i, const FeatureMatrix& batch_v,
                             const FeatureMatrix& batch_i, diff::Var* cycle_term = nullptr);
double generator_adv_loss_value(const FeatureMatrix& batch_v, const FeatureMatrix& batch_i,
                                const TranslationPair& pair);

struct GanOptimizers {
    diff::Optimizer generators;
    diff::Optimizer critics;
};

struct GanStepStats {
    double cycle = 0.0;        // cycle term of the generator update
    double wasserstein = 0.0;  // estimate from the last critic update
};

// n_critic critic updates (with weight clipping) followed by one generator
// update, all on the given batches.
GanStepStats gan_step(TranslationPair& pair, const FeatureMatrix& batch_v,
                      const FeatureMatrix& batch_i, GanOptimizers& opts, int n_critic);

}  // namespace uvireid
