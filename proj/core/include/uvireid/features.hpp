#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "uvireid/errors.hpp"

namespace uvireid {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline void l2_normalize_inplace(std::span<double> v) {
    double n = l2_norm(v);
    if (n < 1e-12) throw NumericError("l2_normalize: vector norm underflow");
    for (double& x : v) x /= n;
}

// Row-major stack of equal-length feature vectors.
struct FeatureMatrix {
    int dim = 0;
    std::vector<double> values;

    FeatureMatrix() = default;
    explicit FeatureMatrix(int d) : dim(d) {}

    int rows() const { return dim == 0 ? 0 : static_cast<int>(values.size()) / dim; }

    std::span<const double> row(int i) const {
        return {values.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
    }
    std::span<double> row(int i) {
        return {values.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
    }
    void append(std::span<const double> v) {
        if (static_cast<int>(v.size()) != dim) throw ContractError("FeatureMatrix: row length mismatch");
        values.insert(values.end(), v.begin(), v.end());
    }
};

}  // namespace uvireid
