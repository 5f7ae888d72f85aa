#include "gna/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gna {

Weights::Weights(std::vector<double> values) : values_(std::move(values))
{
    if (values_.size() < 2) throw std::invalid_argument("weights need at least 2 entries");
    double total = 0.0;
    for (double w : values_) {
        if (!(w > 0.0 && w < 1.0))
            throw std::invalid_argument("weight entries must lie in (0, 1)");
        total += w;
    }
    if (std::abs(total - 1.0) > kSimplexTolerance)
        throw std::invalid_argument("weights must sum to 1");
}

namespace detail {

std::size_t argmax_lowest(std::span<const double> values)
{
    std::size_t best = 0;
    for (std::size_t a = 1; a < values.size(); ++a)
        if (values[a] > values[best]) best = a;
    return best;
}

void neyman_weights_into(std::size_t best, std::span<const double> variances,
                         std::span<double> out)
{
    const std::size_t k = variances.size();
    double rest = 0.0;
    for (std::size_t c = 0; c < k; ++c)
        if (c != best) rest += variances[c];
    const double sd_best = std::sqrt(variances[best]);
    const double sd_rest = std::sqrt(rest);
    const double w_best = sd_best / (sd_best + sd_rest);
    out[best] = w_best;
    if (k == 2) {
        // Two arms: the plain Neyman ratio s_other / (s_best + s_other).
        const std::size_t other = 1 - best;
        out[other] = sd_rest / (sd_best + sd_rest);
        return;
    }
    for (std::size_t a = 0; a < k; ++a)
        if (a != best) out[a] = (1.0 - w_best) * variances[a] / rest;
}

void mix_weight_floor(std::span<double> w, double w_min)
{
    if (w_min <= 0.0) return;
    const double k = static_cast<double>(w.size());
    if (w_min * k >= 1.0) throw std::invalid_argument("w_min must be below 1/K");
    const double keep = 1.0 - k * w_min;
    for (double& x : w) x = keep * x + w_min;
}

}  // namespace detail

Weights gna_target_weights(std::size_t best, std::span<const double> sigmas)
{
    if (sigmas.size() < 2) throw std::invalid_argument("need at least 2 arms");
    if (best >= sigmas.size()) throw std::out_of_range("best arm index out of range");
    std::vector<double> variances(sigmas.size());
    for (std::size_t a = 0; a < sigmas.size(); ++a) {
        if (!(sigmas[a] > 0.0) || !std::isfinite(sigmas[a]))
            throw std::invalid_argument("sigmas must be finite and > 0");
        variances[a] = sigmas[a] * sigmas[a];
    }
    std::vector<double> w(sigmas.size());
    detail::neyman_weights_into(best, variances, w);
    return Weights(std::move(w));
}

Weights gna_estimated_weights(const VarianceEstimates& est)
{
    const std::size_t k = est.sigma2_hat.size();
    if (k < 2 || est.mu_tilde.size() != k || est.counts.size() != k)
        throw std::invalid_argument("variance estimates have inconsistent lengths");
    for (std::size_t a = 0; a < k; ++a) {
        if (est.counts[a] == 0)
            throw std::invalid_argument("arm " + std::to_string(a) +
                                        " has no observations; estimated weights need "
                                        "every arm initialized");
        if (!(est.sigma2_hat[a] > 0.0))
            throw std::invalid_argument("sigma2_hat entries must be > 0");
    }
    std::vector<double> w(k);
    detail::neyman_weights_into(detail::argmax_lowest(est.mu_tilde), est.sigma2_hat, w);
    return Weights(std::move(w));
}

double floor_variance(double sigma2_tilde, double eta)
{
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
    if (sigma2_tilde < 0.0) throw std::invalid_argument("variance estimate must be >= 0");
    return sigma2_tilde != 0.0 ? sigma2_tilde : eta;
}

Weights uniform_weights(std::size_t num_arms)
{
    if (num_arms < 2) throw std::invalid_argument("uniform weights need K >= 2");
    return Weights(std::vector<double>(num_arms, 1.0 / static_cast<double>(num_arms)));
}

Weights apply_weight_floor(const Weights& w, double w_min)
{
    std::vector<double> out = w.vector();
    detail::mix_weight_floor(out, w_min);
    return Weights(std::move(out));
}

namespace {

constexpr int kMaxIterations = 10000;

struct InnerSolution {
    double rate = 0.0;
    double mass = 0.0;     // sum of suboptimal weights at that rate
    double balance = 0.0;  // sum_{a != best} w_a^2 / var_a
};

// For fixed w_best, solves sum_{a != best} w_a(z) = 1 - w_best for the common
// rate z and returns the per-arm weights through `w`.
InnerSolution solve_common_rate(double w_best, std::size_t best, std::span<const double> gaps2,
                                std::span<const double> variances, std::span<double> w,
                                double tol)
{
    const std::size_t k = variances.size();
    const double load_best = variances[best] / w_best;
    const double target = 1.0 - w_best;
    // w_a(z) > 0 requires z < gap_a^2 / (2 load_best); the mass blows up at
    // the smallest such bound and vanishes as z -> 0.
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < k; ++a)
        if (a != best) hi = std::min(hi, gaps2[a] / (2.0 * load_best));
    double lo = 0.0;

    auto mass_at = [&](double z) {
        double mass = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            if (a == best) continue;
            w[a] = variances[a] / (gaps2[a] / (2.0 * z) - load_best);
            mass += w[a];
        }
        return mass;
    };

    double z = 0.5 * (lo + hi);
    double mass = 0.0;
    for (int it = 0; it < kMaxIterations; ++it) {
        z = 0.5 * (lo + hi);
        mass = mass_at(z);
        // Stop on a tight fit or once the bracket is down to adjacent doubles.
        if (std::abs(mass - target) <= tol * 1e-3 || z <= lo || z >= hi) break;
        (mass > target ? hi : lo) = z;
    }
    InnerSolution sol{z, mass, 0.0};
    for (std::size_t a = 0; a < k; ++a)
        if (a != best) sol.balance += w[a] * w[a] / variances[a];
    return sol;
}

}  // namespace

Weights gj_oracle_weights(std::span<const double> means, std::span<const double> variances,
                          double tol)
{
    const std::size_t k = means.size();
    if (k < 2 || variances.size() != k)
        throw std::invalid_argument("means and variances must have equal length >= 2");
    if (!(tol > 0.0 && tol <= 1e-3)) throw std::invalid_argument("tol must lie in (0, 1e-3]");
    for (double v : variances)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("variances must be finite and > 0");
    const std::size_t best = detail::argmax_lowest(means);
    std::vector<double> gaps2(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        if (a == best) continue;
        const double gap = means[best] - means[a];
        if (!(gap > 0.0)) throw std::invalid_argument("non-unique best arm");
        gaps2[a] = gap * gap;
    }

    std::vector<double> w(k, 0.0);
    // balance(w_best) = w_best^2/var_best - sum w_a^2/var_a is increasing in
    // w_best: the first term grows while the suboptimal mass shrinks.
    double lo = 0.0;
    double hi = 1.0;
    double w_best = 0.5;
    double residual = std::numeric_limits<double>::infinity();
    InnerSolution inner;
    int it = 0;
    for (; it < kMaxIterations; ++it) {
        w_best = 0.5 * (lo + hi);
        inner = solve_common_rate(w_best, best, gaps2, variances, w, tol);
        residual = w_best * w_best / variances[best] - inner.balance;
        if (std::abs(residual) <= tol * 1e-3 || w_best <= lo || w_best >= hi) break;
        (residual > 0.0 ? hi : lo) = w_best;
    }
    const double mass_residual = inner.mass - (1.0 - w_best);
    w[best] = w_best;

    // Final residuals: rate equality across suboptimal arms and the balance.
    const double load_best = variances[best] / w_best;
    double rate_min = std::numeric_limits<double>::infinity();
    double rate_max = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        if (a == best) continue;
        const double r = gaps2[a] / (2.0 * (load_best + variances[a] / w[a]));
        rate_min = std::min(rate_min, r);
        rate_max = std::max(rate_max, r);
    }
    const double rate_spread = (rate_max - rate_min) / rate_max;
    if (it == kMaxIterations || std::abs(residual) > tol || rate_spread > tol ||
        std::abs(mass_residual) > tol) {
        std::ostringstream msg;
        msg << "GJ solver did not converge: balance residual " << residual
            << ", relative rate spread " << rate_spread << ", mass residual " << mass_residual;
        throw std::runtime_error(msg.str());
    }
    // Renormalize away the last bits of bisection error.
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    return Weights(std::move(w));
}

}  // namespace gna
