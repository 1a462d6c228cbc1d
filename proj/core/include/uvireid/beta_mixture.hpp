#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace uvireid {

// Min-max normalization of an epoch's per-sample losses into [eps, 1-eps];
// a constant vector maps to all 0.5.
std::vector<double> normalize_losses(std::span<const double> losses, double eps = 1e-4);

struct BetaComponent {
    double alpha = 1.0;
    double beta = 1.0;
};

// Two-component Beta mixture over normalized losses. Component 0 is the
// clean one (lower mean), component 1 the noisy one; fit_bmm enforces the
// ordering by swapping after the final iteration.
struct BetaMixture {
    std::array<BetaComponent, 2> component{BetaComponent{2.0, 5.0}, BetaComponent{5.0, 2.0}};
    std::array<double, 2> weight{0.5, 0.5};

    double component_mean(int k) const;
    double log_density(int k, double x) const;
    double log_likelihood(std::span<const double> x) const;
    // Posterior probability that x came from the noisy component.
    double posterior_noisy(double x) const;
};

struct BmmFit {
    BetaMixture model;
    std::vector<double> loglik;  // before iteration 1, then after each
};

// EM with weighted method-of-moments M-steps. Candidate component updates
// are accepted only if they do not decrease the weighted complete-data
// likelihood, which keeps the loglik trace non-decreasing. Returns nullopt
// for fewer than 4 samples (caller falls back to static weights).
std::optional<BmmFit> fit_bmm(std::span<const double> x, int iters = 10);

}  // namespace uvireid
