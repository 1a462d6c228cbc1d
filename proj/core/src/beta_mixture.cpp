#include "uvireid/beta_mixture.hpp"

#include <algorithm>
#include <cmath>

#include "uvireid/errors.hpp"

namespace uvireid {

std::vector<double> normalize_losses(std::span<const double> losses, double eps) {
    if (losses.size() < 2) throw ContractError("normalize_losses: need at least 2 samples");
    double lo = losses[0], hi = losses[0];
    for (double v : losses) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<double> out(losses.size());
    if (hi - lo < 1e-300) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    for (size_t i = 0; i < losses.size(); ++i) {
        double v = (losses[i] - lo) / (hi - lo);
        out[i] = std::clamp(v, eps, 1.0 - eps);
    }
    return out;
}

double BetaMixture::component_mean(int k) const {
    const BetaComponent& c = component[static_cast<size_t>(k)];
    return c.alpha / (c.alpha + c.beta);
}

double BetaMixture::log_density(int k, double x) const {
    const BetaComponent& c = component[static_cast<size_t>(k)];
    double log_b = std::lgamma(c.alpha) + std::lgamma(c.beta) - std::lgamma(c.alpha + c.beta);
    return (c.alpha - 1.0) * std::log(x) + (c.beta - 1.0) * std::log(1.0 - x) - log_b;
}

double BetaMixture::log_likelihood(std::span<const double> x) const {
    double total = 0.0;
    for (double v : x) {
        double l0 = std::log(weight[0]) + log_density(0, v);
        double l1 = std::log(weight[1]) + log_density(1, v);
        double m = std::max(l0, l1);
        total += m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
    }
    return total;
}

double BetaMixture::posterior_noisy(double x) const {
    double l0 = std::log(weight[0]) + log_density(0, x);
    double l1 = std::log(weight[1]) + log_density(1, x);
    double m = std::max(l0, l1);
    double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
    return e1 / (e0 + e1);
}

namespace {

constexpr double kParamLo = 1e-2;
constexpr double kParamHi = 1e4;

// Weighted complete-data log-likelihood contribution of one component.
double component_q(const BetaComponent& c, std::span<const double> x, std::span<const double> r) {
    double log_b = std::lgamma(c.alpha) + std::lgamma(c.beta) - std::lgamma(c.alpha + c.beta);
    double q = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
        q += r[i] * ((c.alpha - 1.0) * std::log(x[i]) + (c.beta - 1.0) * std::log(1.0 - x[i]) - log_b);
    return q;
}

}  // namespace

std::optional<BmmFit> fit_bmm(std::span<const double> x, int iters) {
    if (iters < 1) throw ContractError("fit_bmm: iters must be >= 1");
    if (x.size() < 4) return std::nullopt;
    for (double v : x)
        if (!(v > 0.0 && v < 1.0)) throw ContractError("fit_bmm: samples must lie in (0, 1)");

    BmmFit fit;
    BetaMixture& bmm = fit.model;
    size_t n = x.size();
    std::vector<double> r1(n);  // responsibility of component 1
    fit.loglik.push_back(bmm.log_likelihood(x));

    for (int it = 0; it < iters; ++it) {
        // E-step
        for (size_t i = 0; i < n; ++i) r1[i] = bmm.posterior_noisy(x[i]);

        // M-step: exact weight update, method-of-moments candidates for
        // (alpha, beta) guarded so the EM objective never decreases.
        double sum1 = 0.0;
        for (double v : r1) sum1 += v;
        double pi1 = std::clamp(sum1 / n, 1e-6, 1.0 - 1e-6);
        bmm.weight = {1.0 - pi1, pi1};

        for (int k = 0; k < 2; ++k) {
            std::vector<double> rk(n);
            double total = 0.0;
            for (size_t i = 0; i < n; ++i) {
                rk[i] = k == 1 ? r1[i] : 1.0 - r1[i];
                total += rk[i];
            }
            if (total < 1e-9) continue;  // component owns nothing; keep params
            double mean = 0.0;
            for (size_t i = 0; i < n; ++i) mean += rk[i] * x[i];
            mean /= total;
            double var = 0.0;
            for (size_t i = 0; i < n; ++i) var += rk[i] * (x[i] - mean) * (x[i] - mean);
            var /= total;
            if (var < 1e-12) continue;
            double common = mean * (1.0 - mean) / var - 1.0;
            if (common <= 0.0) continue;
            BetaComponent cand{std::clamp(mean * common, kParamLo, kParamHi),
                               std::clamp((1.0 - mean) * common, kParamLo, kParamHi)};
            double q_old = component_q(bmm.component[static_cast<size_t>(k)], x, rk);
            double q_new = component_q(cand, x, rk);
            if (q_new >= q_old - 1e-12) bmm.component[static_cast<size_t>(k)] = cand;
        }
        fit.loglik.push_back(bmm.log_likelihood(x));
    }

    // Clean component first (lower mean).
    if (bmm.component_mean(0) > bmm.component_mean(1)) {
        std::swap(bmm.component[0], bmm.component[1]);
        std::swap(bmm.weight[0], bmm.weight[1]);
    }
    return fit;
}

}  // namespace uvireid
