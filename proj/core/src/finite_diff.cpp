#include "uvireid/finite_diff.hpp"

#include <algorithm>
#include <cmath>

#include "uvireid/errors.hpp"

namespace uvireid::diff {

namespace {
double eval_at(const LossBuilder& f, const Tensor& x) {
    Tape tape;
    Var leaf = tape.input(x);
    Var loss = f(tape, leaf);
    return loss.scalar_value();
}
}  // namespace

double finite_diff_check(const LossBuilder& f, const Tensor& x, double h) {
    Tape tape;
    Var leaf = tape.input(x);
    Var loss = f(tape, leaf);
    auto grads = tape.backward(loss);
    Tensor analytic = tape.gradient(grads, leaf);

    double worst = 0.0;
    Tensor probe = x;
    for (int i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        double up = eval_at(f, probe);
        probe[i] = x[i] - h;
        double down = eval_at(f, probe);
        probe[i] = x[i];
        double numeric = (up - down) / (2.0 * h);
        double err = std::fabs(analytic[i] - numeric) / std::max(1e-12, std::fabs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace uvireid::diff
