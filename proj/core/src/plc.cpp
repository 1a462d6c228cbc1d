#include "uvireid/plc.hpp"

#include "uvireid/errors.hpp"

namespace uvireid {

using diff::Tape;
using diff::Var;

int nearest_centroid(const MemoryBank& bank, std::span<const double> z) {
    int best = 0;
    double best_sim = dot(bank.centroid(0), z);
    for (int k = 1; k < bank.size(); ++k) {
        double s = dot(bank.centroid(k), z);
        if (s > best_sim) {
            best_sim = s;
            best = k;
        }
    }
    return best;
}

int nearest_centroid_rows(const diff::Tensor& bank, std::span<const double> z) {
    int best = 0;
    double best_sim = dot(bank.row(0), z);
    for (int k = 1; k < bank.rows(); ++k) {
        double s = dot(bank.row(k), z);
        if (s > best_sim) {
            best_sim = s;
            best = k;
        }
    }
    return best;
}

Var cluster_nce_loss(Tape& tape, Var z, Var bank, int pos_id, double tau) {
    if (tau <= 0.0) throw ConfigError("cluster_nce_loss: tau must be positive");
    const diff::Tensor& m = bank.value();
    if (pos_id < 0 || pos_id >= m.rows()) throw ContractError("cluster_nce_loss: pos_id out of range");
    Var logits = tape.scale(tape.matvec(bank, z), 1.0 / tau);
    return tape.sub(tape.logsumexp(logits), tape.pick(logits, pos_id));
}

Var plc_loss(Tape& tape, Var z, Var bank, int pos_id, int nearest_id, double w, double tau) {
    if (tau <= 0.0) throw ConfigError("plc_loss: tau must be positive");
    if (w < 0.0 || w > 1.0) throw ContractError("plc_loss: w must lie in [0, 1]");
    const diff::Tensor& m = bank.value();
    int k = m.rows();
    if (pos_id < 0 || pos_id >= k || nearest_id < 0 || nearest_id >= k)
        throw ContractError("plc_loss: centroid id out of range");

    Var logits = tape.scale(tape.matvec(bank, z), 1.0 / tau);
    // Shift by the max logit (a constant) so the exponentials stay tame; the
    // shift cancels in log(pull) - log(push).
    double shift = logits.value()[0];
    for (int i = 1; i < k; ++i) shift = std::max(shift, logits.value()[i]);
    Var e = tape.exp(tape.add_const(logits, -shift));

    Var pull = pos_id == nearest_id
                   ? tape.pick(e, pos_id)
                   : tape.add(tape.scale(tape.pick(e, pos_id), 1.0 - w),
                              tape.scale(tape.pick(e, nearest_id), w));
    std::vector<double> neg_mask(static_cast<size_t>(k), 1.0);
    neg_mask[static_cast<size_t>(pos_id)] = 0.0;
    neg_mask[static_cast<size_t>(nearest_id)] = 0.0;
    Var push = tape.add(pull, tape.masked_sum(e, std::move(neg_mask)));
    return tape.sub(tape.log(push), tape.log(pull));
}

double cluster_nce_value(std::span<const double> z, const MemoryBank& bank, int pos_id, double tau) {
    Tape tape;
    Var zv = tape.input(z);
    Var bv = tape.input(bank.as_tensor());
    return cluster_nce_loss(tape, zv, bv, pos_id, tau).scalar_value();
}

double plc_value(std::span<const double> z, const MemoryBank& bank, int pos_id, int nearest_id,
                 double w, double tau) {
    Tape tape;
    Var zv = tape.input(z);
    Var bv = tape.input(bank.as_tensor());
    return plc_loss(tape, zv, bv, pos_id, nearest_id, w, tau).scalar_value();
}

}  // namespace uvireid
