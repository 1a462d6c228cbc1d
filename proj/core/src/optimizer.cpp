#include "uvireid/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "uvireid/errors.hpp"

namespace uvireid::diff {

Optimizer::Optimizer(OptKind kind, double learning_rate, Schedule schedule)
    : kind_(kind), base_lr_(learning_rate), schedule_(std::move(schedule)) {
    if (base_lr_ <= 0.0) throw ConfigError("optimizer: learning rate must be positive");
}

void Optimizer::set_epoch(int epoch) { epoch_ = epoch; }

double Optimizer::effective_lr() const {
    double lr = base_lr_;
    for (int e : schedule_.decay_epochs)
        if (epoch_ >= e) lr *= schedule_.decay_factor;
    if (schedule_.warmup_steps > 0) {
        double frac = std::min(1.0, static_cast<double>(step_) / schedule_.warmup_steps);
        lr *= frac;
    }
    return lr;
}

void Optimizer::step(std::span<const ParamRef> params, std::span<const Tensor> grads) {
    if (params.size() != grads.size())
        throw ContractError("optimizer: params/grads size mismatch");
    for (size_t i = 0; i < grads.size(); ++i) {
        if (!grads[i].all_finite())
            throw NumericError("non-finite gradient for parameter " + params[i].name);
        if (!grads[i].same_shape(*params[i].tensor))
            throw ContractError("optimizer: gradient shape mismatch for " + params[i].name);
    }

    double lr = effective_lr();
    ++step_;

    if (kind_ == OptKind::Sgd) {
        if (lr == 0.0) return;
        for (size_t i = 0; i < params.size(); ++i) {
            Tensor& p = *params[i].tensor;
            const Tensor& g = grads[i];
            for (int j = 0; j < p.size(); ++j) p[j] -= lr * g[j];
        }
        return;
    }

    // Adam with bias-corrected moments. Moments update even when warm-up
    // holds the learning rate at zero.
    if (!moments_ready_) {
        m_.clear();
        v_.clear();
        for (const ParamRef& p : params) {
            m_.emplace_back(p.tensor->shape());
            v_.emplace_back(p.tensor->shape());
        }
        moments_ready_ = true;
    }
    if (m_.size() != params.size())
        throw ContractError("optimizer: parameter set changed after first step");

    double bc1 = 1.0 - std::pow(kBeta1, step_);
    double bc2 = 1.0 - std::pow(kBeta2, step_);
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i].tensor;
        const Tensor& g = grads[i];
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (int j = 0; j < p.size(); ++j) {
            m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * g[j];
            v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * g[j] * g[j];
            if (lr != 0.0) {
                double mhat = m[j] / bc1;
                double vhat = v[j] / bc2;
                p[j] -= lr * mhat / (std::sqrt(vhat) + kEps);
            }
        }
    }
}

}  // namespace uvireid::diff
