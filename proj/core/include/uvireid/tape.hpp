#pragma once

#include <array>
#include <span>
#include <vector>

#include "uvireid/tensor.hpp"

namespace uvireid::diff {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}
    int id() const { return id_; }
    Tape* tape() const { return tape_; }
    const Tensor& value() const;
    double scalar_value() const;
    bool valid() const { return tape_ != nullptr; }

private:
    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Reverse-mode tape for feed-forward chains. Every op records its parents
// and enough state to push gradients back; backward() walks the nodes in
// reverse creation order. Single-threaded by construction, so results are
// bit-reproducible for fixed inputs.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var input(Tensor value);
    Var input(std::span<const double> v);
    Var input_scalar(double v);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);  // elementwise
    Var scale(Var a, double c);
    Var add_const(Var a, double c);
    Var matvec(Var m, Var v);  // (r x c) * (c) -> (r)
    Var relu(Var a);
    Var tanh(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var abs(Var a);
    Var sum(Var a);
    Var mean(Var a);
    Var dot(Var a, Var b);
    Var pick(Var v, int index);
    Var masked_sum(Var v, std::vector<double> mask);
    Var logsumexp(Var v);
    Var softmax(Var v);
    Var log_softmax(Var v);
    Var l2_normalize(Var v);
    Var stack(std::span<const Var> scalars);      // -> vector
    Var stack_rows(std::span<const Var> vectors); // -> matrix

    const Tensor& value(int id) const;
    int size() const { return static_cast<int>(nodes_.size()); }

    // Gradients of a scalar loss w.r.t. every node; nodes the loss does not
    // depend on get an empty tensor. Throws ContractError on non-scalar loss.
    std::vector<Tensor> backward(Var loss) const;

    // Gradient of `v` out of a backward() result, densified to v's shape.
    Tensor gradient(const std::vector<Tensor>& grads, Var v) const;

private:
    enum class Op {
        Leaf, Add, Sub, Mul, Scale, AddConst, MatVec, Relu, Tanh, Exp, Log,
        Abs, Sum, Mean, Dot, Pick, MaskedSum, LogSumExp, Softmax, LogSoftmax,
        L2Normalize, Stack, StackRows,
    };

    struct Node {
        Op op = Op::Leaf;
        Tensor value;
        std::array<int, 2> parent{-1, -1};
        std::vector<int> parents;   // Stack / StackRows
        std::vector<double> mask;   // MaskedSum
        double c = 0.0;             // Scale / AddConst / L2Normalize norm cache
        int index = -1;             // Pick
    };

    Var push(Node node, const char* opname);
    const Node& node(Var v) const;
    void check_same_tape(Var v) const;

    std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

inline Var operator+(Var a, Var b) { return a.tape()->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape()->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape()->mul(a, b); }
inline Var operator*(Var a, double c) { return a.tape()->scale(a, c); }
inline Var operator*(double c, Var a) { return a.tape()->scale(a, c); }

}  // namespace uvireid::diff
