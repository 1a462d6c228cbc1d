#include "uvireid/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uvireid/errors.hpp"

namespace uvireid::diff {

double Var::scalar_value() const {
    const Tensor& t = tape_->value(id_);
    if (!t.is_scalar()) throw ContractError("Var::scalar_value: node is not a scalar");
    return t[0];
}

const Tape::Node& Tape::node(Var v) const {
    check_same_tape(v);
    return nodes_[static_cast<size_t>(v.id())];
}

void Tape::check_same_tape(Var v) const {
    if (v.tape() != this || v.id() < 0 || v.id() >= size())
        throw ContractError("Tape: variable does not belong to this tape");
}

Var Tape::push(Node n, const char* opname) {
    if (!n.value.all_finite())
        throw NumericError(std::string("non-finite value produced by op ") + opname);
    nodes_.push_back(std::move(n));
    return Var(this, size() - 1);
}

const Tensor& Tape::value(int id) const { return nodes_[static_cast<size_t>(id)].value; }

Var Tape::input(Tensor value) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    return push(std::move(n), "input");
}

Var Tape::input(std::span<const double> v) { return input(Tensor::vector(v)); }

Var Tape::input_scalar(double v) { return input(Tensor::scalar(v)); }

Var Tape::add(Var a, Var b) {
    const Tensor& x = node(a).value;
    const Tensor& y = node(b).value;
    if (!x.same_shape(y)) throw ContractError("add: shape mismatch");
    Tensor out = x;
    for (int i = 0; i < out.size(); ++i) out[i] += y[i];
    Node n;
    n.op = Op::Add;
    n.value = std::move(out);
    n.parent = {a.id(), b.id()};
    return push(std::move(n), "add");
}

Var Tape::sub(Var a, Var b) {
    const Tensor& x = node(a).value;
    const Tensor& y = node(b).value;
    if (!x.same_shape(y)) throw ContractError("sub: shape mismatch");
    Tensor out = x;
    for (int i = 0; i < out.size(); ++i) out[i] -= y[i];
    Node n;
    n.op = Op::Sub;
    n.value = std::move(out);
    n.parent = {a.id(), b.id()};
    return push(std::move(n), "sub");
}

Var Tape::mul(Var a, Var b) {
    const Tensor& x = node(a).value;
    const Tensor& y = node(b).value;
    if (!x.same_shape(y)) throw ContractError("mul: shape mismatch");
    Tensor out = x;
    for (int i = 0; i < out.size(); ++i) out[i] *= y[i];
    Node n;
    n.op = Op::Mul;
    n.value = std::move(out);
    n.parent = {a.id(), b.id()};
    return push(std::move(n), "mul");
}

Var Tape::scale(Var a, double c) {
    Tensor out = node(a).value;
    for (int i = 0; i < out.size(); ++i) out[i] *= c;
    Node n;
    n.op = Op::Scale;
    n.value = std::move(out);
    n.parent = {a.id(), -1};
    n.c = c;
    return push(std::move(n), "scale");
}

Var Tape::add_const(Var a, double c) {
    Tensor out = node(a).value;
    for (int i = 0; i < out.size(); ++i) out[i] += c;
    Node n;
    n.op = Op::AddConst;
    n.value = std::move(out);
    n.parent = {a.id(), -1};
    n.c = c;
    return push(std::move(n), "add_const");
}

Var Tape::matvec(Var m, Var v) {
    const Tensor& w = node(m).value;
    const Tensor& x = node(v).value;
    if (w.rank() != 2 || x.rank() != 1 || w.cols() != x.size())
        throw ContractError("matvec: expected (r x c) matrix and (c) vector");
    Tensor out({w.rows()});
    for (int r = 0; r < w.rows(); ++r) {
        double acc = 0.0;
        const double* wr = w.data() + static_cast<size_t>(r) * w.cols();
        for (int c = 0; c < w.cols(); ++c) acc += wr[c] * x[c];
        out[r] = acc;
    }
    Node n;
    n.op = Op::MatVec;
    n.value = std::move(out);
    n.parent = {m.id(), v.id()};
    return push(std::move(n), "matvec");
}

Var Tape::relu(Var a) {
    Tensor out = node(a).value;
    for (int i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
    Node n;
    n.op = Op::Relu;
    n.value = std::move(out);
    n.parent = {a.id(), -1};
    return push(std::move(n), "relu");
}

Var Tape::tanh(Var a) {
    Tensor out = node(a).value;
    for (int i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    Node n;
    n.op = Op::Tanh;
    n.value = std::move(out);
    n.parent = {a.id(), -1};
    return push(std::move(n), "tanh");
}

Var Tape::exp(Var a) {
    Tensor out = node(a).value;
    for (int i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
    Node n;
    n.op = Op::Exp;
    n.value = std::move(out);
    n.parent = {a.id(), -1};
    return push(std::move(n), "exp");
}

Var Tape::log(Var a) {
    Tensor out = node(a).value;
    for (int i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
    Node n;
    n.op = Op::Log;
    n.value = std::move(out);
    n.parent = {a.id(), -1};
    return push(std::move(n), "log");
}

Var Tape::abs(Var a) {
    Tensor out = node(a).value;
    for (int i = 0; i < out.size(); ++i) out[i] = std::fabs(out[i]);
    Node n;
    n.op = Op::Abs;
    n.value = std::move(out);
    n.parent = {a.id(), -1};
    return push(std::move(n), "abs");
}

Var Tape::sum(Var a) {
    const Tensor& x = node(a).value;
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += x[i];
    Node n;
    n.op = Op::Sum;
    n.value = Tensor::scalar(acc);
    n.parent = {a.id(), -1};
    return push(std::move(n), "sum");
}

Var Tape::mean(Var a) {
    const Tensor& x = node(a).value;
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += x[i];
    Node n;
    n.op = Op::Mean;
    n.value = Tensor::scalar(acc / x.size());
    n.parent = {a.id(), -1};
    return push(std::move(n), "mean");
}

Var Tape::dot(Var a, Var b) {
    const Tensor& x = node(a).value;
    const Tensor& y = node(b).value;
    if (x.rank() != 1 || !x.same_shape(y)) throw ContractError("dot: expected equal-length vectors");
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    Node n;
    n.op = Op::Dot;
    n.value = Tensor::scalar(acc);
    n.parent = {a.id(), b.id()};
    return push(std::move(n), "dot");
}

Var Tape::pick(Var v, int index) {
    const Tensor& x = node(v).value;
    if (x.rank() != 1 || index < 0 || index >= x.size())
        throw ContractError("pick: index out of range");
    Node n;
    n.op = Op::Pick;
    n.value = Tensor::scalar(x[index]);
    n.parent = {v.id(), -1};
    n.index = index;
    return push(std::move(n), "pick");
}

Var Tape::masked_sum(Var v, std::vector<double> mask) {
    const Tensor& x = node(v).value;
    if (x.rank() != 1 || static_cast<int>(mask.size()) != x.size())
        throw ContractError("masked_sum: mask length mismatch");
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += mask[static_cast<size_t>(i)] * x[i];
    Node n;
    n.op = Op::MaskedSum;
    n.value = Tensor::scalar(acc);
    n.parent = {v.id(), -1};
    n.mask = std::move(mask);
    return push(std::move(n), "masked_sum");
}

Var Tape::logsumexp(Var v) {
    const Tensor& x = node(v).value;
    if (x.rank() != 1 || x.size() == 0) throw ContractError("logsumexp: expected non-empty vector");
    double m = x[0];
    for (int i = 1; i < x.size(); ++i) m = std::max(m, x[i]);
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += std::exp(x[i] - m);
    Node n;
    n.op = Op::LogSumExp;
    n.value = Tensor::scalar(m + std::log(acc));
    n.parent = {v.id(), -1};
    return push(std::move(n), "logsumexp");
}

namespace {
void stable_softmax(const Tensor& x, Tensor& out) {
    double m = x[0];
    for (int i = 1; i < x.size(); ++i) m = std::max(m, x[i]);
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - m);
        acc += out[i];
    }
    for (int i = 0; i < x.size(); ++i) out[i] /= acc;
}
}  // namespace

Var Tape::softmax(Var v) {
    const Tensor& x = node(v).value;
    if (x.rank() != 1 || x.size() == 0) throw ContractError("softmax: expected non-empty vector");
    Tensor out({x.size()});
    stable_softmax(x, out);
    Node n;
    n.op = Op::Softmax;
    n.value = std::move(out);
    n.parent = {v.id(), -1};
    return push(std::move(n), "softmax");
}

Var Tape::log_softmax(Var v) {
    const Tensor& x = node(v).value;
    if (x.rank() != 1 || x.size() == 0) throw ContractError("log_softmax: expected non-empty vector");
    double m = x[0];
    for (int i = 1; i < x.size(); ++i) m = std::max(m, x[i]);
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += std::exp(x[i] - m);
    double lse = m + std::log(acc);
    Tensor out({x.size()});
    for (int i = 0; i < x.size(); ++i) out[i] = x[i] - lse;
    Node n;
    n.op = Op::LogSoftmax;
    n.value = std::move(out);
    n.parent = {v.id(), -1};
    return push(std::move(n), "log_softmax");
}

Var Tape::l2_normalize(Var v) {
    const Tensor& x = node(v).value;
    if (x.rank() != 1) throw ContractError("l2_normalize: expected a vector");
    double norm2 = 0.0;
    for (int i = 0; i < x.size(); ++i) norm2 += x[i] * x[i];
    double norm = std::sqrt(norm2);
    if (norm < 1e-12) throw NumericError("l2_normalize: vector norm underflow");
    Tensor out({x.size()});
    for (int i = 0; i < x.size(); ++i) out[i] = x[i] / norm;
    Node n;
    n.op = Op::L2Normalize;
    n.value = std::move(out);
    n.parent = {v.id(), -1};
    n.c = norm;
    return push(std::move(n), "l2_normalize");
}

Var Tape::stack(std::span<const Var> scalars) {
    if (scalars.empty()) throw ContractError("stack: empty input");
    Tensor out({static_cast<int>(scalars.size())});
    Node n;
    n.op = Op::Stack;
    for (size_t i = 0; i < scalars.size(); ++i) {
        const Tensor& s = node(scalars[i]).value;
        if (!s.is_scalar()) throw ContractError("stack: inputs must be scalars");
        out[static_cast<int>(i)] = s[0];
        n.parents.push_back(scalars[i].id());
    }
    n.value = std::move(out);
    return push(std::move(n), "stack");
}

Var Tape::stack_rows(std::span<const Var> vectors) {
    if (vectors.empty()) throw ContractError("stack_rows: empty input");
    const Tensor& first = node(vectors[0]).value;
    if (first.rank() != 1) throw ContractError("stack_rows: inputs must be vectors");
    int cols = first.size();
    Tensor out({static_cast<int>(vectors.size()), cols});
    Node n;
    n.op = Op::StackRows;
    for (size_t i = 0; i < vectors.size(); ++i) {
        const Tensor& r = node(vectors[i]).value;
        if (r.rank() != 1 || r.size() != cols) throw ContractError("stack_rows: row length mismatch");
        for (int c = 0; c < cols; ++c) out[static_cast<int>(i) * cols + c] = r[c];
        n.parents.push_back(vectors[i].id());
    }
    n.value = std::move(out);
    return push(std::move(n), "stack_rows");
}

std::vector<Tensor> Tape::backward(Var loss) const {
    check_same_tape(loss);
    const Node& ln = nodes_[static_cast<size_t>(loss.id())];
    if (!ln.value.is_scalar()) throw ContractError("backward: loss must be a scalar");

    std::vector<Tensor> grads(nodes_.size());
    auto grad_of = [&](int id) -> Tensor& {
        Tensor& g = grads[static_cast<size_t>(id)];
        if (g.size() == 0) g = Tensor(nodes_[static_cast<size_t>(id)].value.shape());
        return g;
    };
    grad_of(loss.id())[0] = 1.0;

    for (int id = loss.id(); id >= 0; --id) {
        const Tensor& g = grads[static_cast<size_t>(id)];
        if (g.size() == 0) continue;  // loss does not depend on this node
        const Node& n = nodes_[static_cast<size_t>(id)];
        const int a = n.parent[0];
        const int b = n.parent[1];
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::Add: {
                Tensor& ga = grad_of(a);
                Tensor& gb = grad_of(b);
                for (int i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] += g[i];
                }
                break;
            }
            case Op::Sub: {
                Tensor& ga = grad_of(a);
                Tensor& gb = grad_of(b);
                for (int i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] -= g[i];
                }
                break;
            }
            case Op::Mul: {
                const Tensor& xa = nodes_[static_cast<size_t>(a)].value;
                const Tensor& xb = nodes_[static_cast<size_t>(b)].value;
                Tensor& ga = grad_of(a);
                Tensor& gb = grad_of(b);
                for (int i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] * xb[i];
                    gb[i] += g[i] * xa[i];
                }
                break;
            }
            case Op::Scale: {
                Tensor& ga = grad_of(a);
                for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * n.c;
                break;
            }
            case Op::AddConst: {
                Tensor& ga = grad_of(a);
                for (int i = 0; i < g.size(); ++i) ga[i] += g[i];
                break;
            }
            case Op::MatVec: {
                const Tensor& w = nodes_[static_cast<size_t>(a)].value;
                const Tensor& x = nodes_[static_cast<size_t>(b)].value;
                Tensor& gw = grad_of(a);
                Tensor& gx = grad_of(b);
                int rows = w.rows(), cols = w.cols();
                for (int r = 0; r < rows; ++r) {
                    double gr = g[r];
                    if (gr == 0.0) continue;
                    double* gw_row = gw.data() + static_cast<size_t>(r) * cols;
                    const double* w_row = w.data() + static_cast<size_t>(r) * cols;
                    for (int c = 0; c < cols; ++c) {
                        gw_row[c] += gr * x[c];
                        gx[c] += gr * w_row[c];
                    }
                }
                break;
            }
            case Op::Relu: {
                const Tensor& x = nodes_[static_cast<size_t>(a)].value;
                Tensor& ga = grad_of(a);
                for (int i = 0; i < g.size(); ++i)
                    if (x[i] > 0.0) ga[i] += g[i];
                break;
            }
            case Op::Tanh: {
                Tensor& ga = grad_of(a);
                for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
                break;
            }
            case Op::Exp: {
                Tensor& ga = grad_of(a);
                for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * n.value[i];
                break;
            }
            case Op::Log: {
                const Tensor& x = nodes_[static_cast<size_t>(a)].value;
                Tensor& ga = grad_of(a);
                for (int i = 0; i < g.size(); ++i) ga[i] += g[i] / x[i];
                break;
            }
            case Op::Abs: {
                const Tensor& x = nodes_[static_cast<size_t>(a)].value;
                Tensor& ga = grad_of(a);
                for (int i = 0; i < g.size(); ++i) {
                    if (x[i] > 0.0)
                        ga[i] += g[i];
                    else if (x[i] < 0.0)
                        ga[i] -= g[i];
                }
                break;
            }
            case Op::Sum: {
                Tensor& ga = grad_of(a);
                for (int i = 0; i < ga.size(); ++i) ga[i] += g[0];
                break;
            }
            case Op::Mean: {
                Tensor& ga = grad_of(a);
                double s = g[0] / ga.size();
                for (int i = 0; i < ga.size(); ++i) ga[i] += s;
                break;
            }
            case Op::Dot: {
                const Tensor& xa = nodes_[static_cast<size_t>(a)].value;
                const Tensor& xb = nodes_[static_cast<size_t>(b)].value;
                Tensor& ga = grad_of(a);
                Tensor& gb = grad_of(b);
                for (int i = 0; i < ga.size(); ++i) {
                    ga[i] += g[0] * xb[i];
                    gb[i] += g[0] * xa[i];
                }
                break;
            }
            case Op::Pick: {
                Tensor& ga = grad_of(a);
                ga[n.index] += g[0];
                break;
            }
            case Op::MaskedSum: {
                Tensor& ga = grad_of(a);
                for (int i = 0; i < ga.size(); ++i) ga[i] += g[0] * n.mask[static_cast<size_t>(i)];
                break;
            }
            case Op::LogSumExp: {
                const Tensor& x = nodes_[static_cast<size_t>(a)].value;
                Tensor& ga = grad_of(a);
                Tensor p({x.size()});
                stable_softmax(x, p);
                for (int i = 0; i < ga.size(); ++i) ga[i] += g[0] * p[i];
                break;
            }
            case Op::Softmax: {
                const Tensor& y = n.value;
                Tensor& ga = grad_of(a);
                double gy = 0.0;
                for (int i = 0; i < g.size(); ++i) gy += g[i] * y[i];
                for (int i = 0; i < g.size(); ++i) ga[i] += y[i] * (g[i] - gy);
                break;
            }
            case Op::LogSoftmax: {
                Tensor& ga = grad_of(a);
                double gs = 0.0;
                for (int i = 0; i < g.size(); ++i) gs += g[i];
                for (int i = 0; i < g.size(); ++i) ga[i] += g[i] - gs * std::exp(n.value[i]);
                break;
            }
            case Op::L2Normalize: {
                const Tensor& y = n.value;
                Tensor& ga = grad_of(a);
                double gy = 0.0;
                for (int i = 0; i < g.size(); ++i) gy += g[i] * y[i];
                for (int i = 0; i < g.size(); ++i) ga[i] += (g[i] - gy * y[i]) / n.c;
                break;
            }
            case Op::Stack: {
                for (size_t i = 0; i < n.parents.size(); ++i)
                    grad_of(n.parents[i])[0] += g[static_cast<int>(i)];
                break;
            }
            case Op::StackRows: {
                int cols = n.value.cols();
                for (size_t i = 0; i < n.parents.size(); ++i) {
                    Tensor& gp = grad_of(n.parents[i]);
                    for (int c = 0; c < cols; ++c) gp[c] += g[static_cast<int>(i) * cols + c];
                }
                break;
            }
        }
    }
    return grads;
}

Tensor Tape::gradient(const std::vector<Tensor>& grads, Var v) const {
    check_same_tape(v);
    const Tensor& g = grads[static_cast<size_t>(v.id())];
    if (g.size() == 0) return Tensor(node(v).value.shape());  // uninvolved -> zeros
    return g;
}

}  // namespace uvireid::diff
