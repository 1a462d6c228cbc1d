#include "uvireid/alignment.hpp"

#include "uvireid/errors.hpp"
#include "uvireid/plc.hpp"

namespace uvireid {

using diff::Tape;
using diff::Var;

SimilarityDistribution similarity_distribution(std::span<const double> z, const MemoryBank& bank,
                                               double tau) {
    if (tau <= 0.0) throw ConfigError("similarity_distribution: tau must be positive");
    Tape tape;
    Var logits = tape.scale(tape.matvec(tape.input(bank.as_tensor()), tape.input(z)), 1.0 / tau);
    Var probs = tape.softmax(logits);
    SimilarityDistribution out;
    out.tau = tau;
    const diff::Tensor& p = probs.value();
    out.probs.assign(p.data(), p.data() + p.size());
    return out;
}

Var cma_term(Tape& tape, Var z, Var target_bank, int matched_id, double tau) {
    return cluster_nce_loss(tape, z, target_bank, matched_id, tau);
}

Var f_clu(Tape& tape, Var z, Var real_bank, Var pseudo_bank, double tau) {
    if (tau <= 0.0) throw ConfigError("f_clu: tau must be positive");
    const diff::Tensor& r = real_bank.value();
    const diff::Tensor& p = pseudo_bank.value();
    if (r.rows() != p.rows()) throw ContractError("f_clu: bank sizes differ");
    Var real_logits = tape.scale(tape.matvec(real_bank, z), 1.0 / tau);
    Var pseudo_logits = tape.scale(tape.matvec(pseudo_bank, z), 1.0 / tau);
    // log-probabilities come from log_softmax so vanishing probabilities
    // cannot produce -inf * 0.
    Var term1 = tape.sum(tape.mul(tape.softmax(real_logits), tape.log_softmax(pseudo_logits)));
    Var term2 = tape.sum(tape.mul(tape.softmax(pseudo_logits), tape.log_softmax(real_logits)));
    return tape.add(term1, term2);
}

double f_clu_value(std::span<const double> z, const MemoryBank& real_bank,
                   const MemoryBank& pseudo_bank, double tau) {
    Tape tape;
    Var zv = tape.input(z);
    return f_clu(tape, zv, tape.input(real_bank.as_tensor()), tape.input(pseudo_bank.as_tensor()),
                 tau)
        .scalar_value();
}

Var lfc_batch_loss(Tape& tape, std::span<const Var> f_values, bool plain_mean) {
    if (f_values.empty()) throw ContractError("lfc_batch_loss: empty batch");
    Var f = tape.stack(f_values);
    if (plain_mean) return tape.scale(tape.mean(f), -1.0);
    return tape.sub(tape.logsumexp(f), tape.mean(f));
}

MemoryBank aligned_pseudo_bank(const MemoryBank& pseudo, std::span<const int> match_of_real) {
    MemoryBank out(pseudo.dim(), pseudo.modality(), BankKind::Pseudo, pseudo.lambda());
    for (int k = 0; k < static_cast<int>(match_of_real.size()); ++k) {
        int src = match_of_real[static_cast<size_t>(k)];
        if (src < 0 || src >= pseudo.size())
            throw ContractError("aligned_pseudo_bank: match target out of range");
        out.push_centroid(pseudo.centroid(src));
    }
    return out;
}

double cma_direction_value(const FeatureMatrix& feats, std::span<const int> cluster_ids,
                           std::span<const int> match_map, const MemoryBank& target_bank,
                           double tau) {
    if (feats.rows() == 0) throw ContractError("cma_direction_value: empty batch");
    if (static_cast<size_t>(feats.rows()) != cluster_ids.size())
        throw ContractError("cma_direction_value: feature/label count mismatch");
    Tape tape;
    Var bank = tape.input(target_bank.as_tensor());
    Var acc;
    for (int i = 0; i < feats.rows(); ++i) {
        int cluster = cluster_ids[static_cast<size_t>(i)];
        if (cluster < 0 || cluster >= static_cast<int>(match_map.size()))
            throw ContractError("cma_direction_value: unmatched cluster in batch");
        Var term = cma_term(tape, tape.input(feats.row(i)), bank,
                            match_map[static_cast<size_t>(cluster)], tau);
        acc = i == 0 ? term : tape.add(acc, term);
    }
    return tape.scale(acc, 1.0 / feats.rows()).scalar_value();
}

double lfc_direction_value(const FeatureMatrix& feats, const MemoryBank& real_bank,
                           const MemoryBank& pseudo_aligned, double tau, bool plain_mean) {
    if (feats.rows() == 0) throw ContractError("lfc_direction_value: empty batch");
    Tape tape;
    Var real = tape.input(real_bank.as_tensor());
    Var pseudo = tape.input(pseudo_aligned.as_tensor());
    std::vector<Var> f;
    for (int i = 0; i < feats.rows(); ++i)
        f.push_back(f_clu(tape, tape.input(feats.row(i)), real, pseudo, tau));
    return lfc_batch_loss(tape, f, plain_mean).scalar_value();
}

}  // namespace uvireid
