#include "uvireid/tensor.hpp"

#include <cmath>

#include "uvireid/errors.hpp"

namespace uvireid::diff {

namespace {
size_t shape_product(const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ContractError("Tensor: dimensions must be positive");
        n *= static_cast<size_t>(d);
    }
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size())
        throw ContractError("Tensor: data length does not match shape");
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::vector(std::vector<double> v) {
    int n = static_cast<int>(v.size());
    return Tensor({n}, std::move(v));
}

Tensor Tensor::vector(std::span<const double> v) {
    return vector(std::vector<double>(v.begin(), v.end()));
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> data) {
    return Tensor({rows, cols}, std::move(data));
}

int Tensor::rows() const {
    if (rank() != 2) throw ContractError("Tensor::rows: not a matrix");
    return shape_[0];
}

int Tensor::cols() const {
    if (rank() != 2) throw ContractError("Tensor::cols: not a matrix");
    return shape_[1];
}

std::span<const double> Tensor::row(int r) const {
    int c = cols();
    return {data_.data() + static_cast<size_t>(r) * c, static_cast<size_t>(c)};
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

}  // namespace uvireid::diff
