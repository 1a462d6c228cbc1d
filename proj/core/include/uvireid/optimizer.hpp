#pragma once

#include <span>
#include <vector>

#include "uvireid/network.hpp"
#include "uvireid/tensor.hpp"

namespace uvireid::diff {

enum class OptKind { Sgd, Adam };

struct Schedule {
    int warmup_steps = 0;            // linear warm-up over the first N steps
    std::vector<int> decay_epochs;   // lr *= decay_factor at each listed epoch
    double decay_factor = 0.1;
};

class Optimizer {
public:
    Optimizer(OptKind kind, double learning_rate, Schedule schedule = {});

    void set_epoch(int epoch);  // 1-based
    int steps() const { return step_; }
    double effective_lr() const;

    // Applies one update. Adam moments are laid out in the same order as
    // `params`; the layout is fixed after the first call.
    void step(std::span<const ParamRef> params, std::span<const Tensor> grads);

private:
    OptKind kind_;
    double base_lr_;
    Schedule schedule_;
    int step_ = 0;
    int epoch_ = 1;
    std::vector<Tensor> m_, v_;
    bool moments_ready_ = false;
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;
};

}  // namespace uvireid::diff
