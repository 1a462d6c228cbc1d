#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace uvireid::diff {

// Dense row-major tensor of doubles. Rank 0 (scalar), 1 (vector) and
// 2 (matrix) are what the engine actually produces.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor vector(std::vector<double> v);
    static Tensor vector(std::span<const double> v);
    static Tensor matrix(int rows, int cols, std::vector<double> data);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int size() const { return static_cast<int>(data_.size()); }
    bool is_scalar() const { return data_.size() == 1 && shape_.empty(); }

    int rows() const;
    int cols() const;

    double& operator[](int i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int i) const { return data_[static_cast<size_t>(i)]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<const double> values() const { return data_; }
    std::span<double> values() { return data_; }
    std::span<const double> row(int r) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    void fill(double v);

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

}  // namespace uvireid::diff
