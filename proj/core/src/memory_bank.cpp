#include "uvireid/memory_bank.hpp"

#include <string>

#include "uvireid/translation.hpp"

namespace uvireid {

MemoryBank::MemoryBank(int dim, Modality modality, BankKind kind, double lambda)
    : centroids_(dim), modality_(modality), kind_(kind), lambda_(lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("memory bank: lambda must be in [0, 1]");
}

namespace {
std::vector<double> normalized_mean(const std::vector<std::vector<double>>& rows) {
    std::vector<double> mean(rows.front().size(), 0.0);
    for (const auto& r : rows)
        for (size_t j = 0; j < mean.size(); ++j) mean[j] += r[j];
    for (double& v : mean) v /= static_cast<double>(rows.size());
    double n = l2_norm(mean);
    if (n < 1e-9)
        throw ContractError("memory bank: degenerate cluster mean (near-zero norm), cannot normalize");
    for (double& v : mean) v /= n;
    return mean;
}
}  // namespace

MemoryBank MemoryBank::init(const FeatureMatrix& all_feats,
                            const std::vector<std::vector<int>>& members, Modality modality,
                            double lambda) {
    if (members.empty()) throw ContractError("memory bank: need at least one cluster");
    MemoryBank bank(all_feats.dim, modality, BankKind::Real, lambda);
    for (size_t c = 0; c < members.size(); ++c) {
        if (members[c].empty())
            throw ContractError("memory bank: empty cluster " + std::to_string(c));
        std::vector<std::vector<double>> rows;
        for (int idx : members[c]) {
            auto r = all_feats.row(idx);
            rows.emplace_back(r.begin(), r.end());
        }
        bank.push_centroid(normalized_mean(rows));
    }
    return bank;
}

MemoryBank MemoryBank::init_pseudo(const FeatureMatrix& all_feats,
                                   const std::vector<std::vector<int>>& src_members,
                                   const diff::Network& gen, Modality target_modality,
                                   double lambda) {
    if (src_members.empty()) throw ContractError("memory bank: need at least one cluster");
    MemoryBank bank(all_feats.dim, target_modality, BankKind::Pseudo, lambda);
    for (size_t c = 0; c < src_members.size(); ++c) {
        if (src_members[c].empty())
            throw ContractError("memory bank: empty cluster " + std::to_string(c));
        std::vector<std::vector<double>> rows;
        for (int idx : src_members[c]) rows.push_back(translate(gen, all_feats.row(idx)));
        bank.push_centroid(normalized_mean(rows));
    }
    return bank;
}

std::span<const double> MemoryBank::centroid(int j) const {
    if (j < 0 || j >= size()) throw ContractError("memory bank: centroid index out of range");
    return centroids_.row(j);
}

void MemoryBank::push_centroid(std::span<const double> c) { centroids_.append(c); }

void MemoryBank::ema_update(int j, std::span<const double> z) {
    if (j < 0 || j >= size()) throw ContractError("memory bank: centroid index out of range");
    if (static_cast<int>(z.size()) != dim()) throw ContractError("memory bank: feature dim mismatch");
    if (lambda_ == 1.0) return;  // centroid unchanged, bit-exact
    std::span<double> c = centroids_.row(j);
    if (lambda_ == 0.0) {
        for (size_t i = 0; i < z.size(); ++i) c[i] = z[i];
        return;
    }
    for (size_t i = 0; i < z.size(); ++i) c[i] = lambda_ * c[i] + (1.0 - lambda_) * z[i];
    l2_normalize_inplace(c);
}

diff::Tensor MemoryBank::as_tensor() const {
    return diff::Tensor::matrix(size(), dim(), centroids_.values);
}

}  // namespace uvireid
