#pragma once

#include <span>
#include <vector>

#include "uvireid/dataset.hpp"
#include "uvireid/features.hpp"
#include "uvireid/network.hpp"
#include "uvireid/tensor.hpp"

namespace uvireid {

enum class BankKind { Real, Pseudo };

// Fixed-size table of unit-norm cluster centroids with momentum updates:
// c_j <- normalize(lambda * c_j + (1 - lambda) * z).
class MemoryBank {
public:
    MemoryBank() = default;
    MemoryBank(int dim, Modality modality, BankKind kind, double lambda);

    // Centroid j = normalized mean of the member features (real bank).
    static MemoryBank init(const FeatureMatrix& all_feats,
                           const std::vector<std::vector<int>>& members, Modality modality,
                           double lambda);

    // Pseudo bank: one centroid per source cluster, the normalized mean of
    // the generator-translated member features.
    static MemoryBank init_pseudo(const FeatureMatrix& all_feats,
                                  const std::vector<std::vector<int>>& src_members,
                                  const diff::Network& gen, Modality target_modality,
                                  double lambda);

    int size() const { return centroids_.rows(); }
    int dim() const { return centroids_.dim; }
    std::span<const double> centroid(int j) const;
    void push_centroid(std::span<const double> c);

    void ema_update(int j, std::span<const double> z);

    diff::Tensor as_tensor() const;  // (K x d) snapshot for tape leaves

    double lambda() const { return lambda_; }
    Modality modality() const { return modality_; }
    BankKind kind() const { return kind_; }

private:
    FeatureMatrix centroids_;
    Modality modality_ = Modality::Visible;
    BankKind kind_ = BankKind::Real;
    double lambda_ = 0.2;
};

}  // namespace uvireid
