#include "gna/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gna {

namespace {

void require_positive(std::span<const double> sigmas)
{
    if (sigmas.size() < 2) throw std::invalid_argument("need at least 2 arms");
    for (double s : sigmas)
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::invalid_argument("sigmas must be finite and > 0");
}

double xlogx_ratio(double x, double y)
{
    return x == 0.0 ? 0.0 : x * std::log(x / y);
}

struct GridMin {
    double value = std::numeric_limits<double>::infinity();
    double mu = 0.0;
    std::size_t arm = 0;
};

void scan(const SigmaMap& sigma_of_mu, std::size_t num_arms, double mu, GridMin& best)
{
    const std::vector<double> sigmas = sigma_of_mu(mu);
    if (sigmas.size() != num_arms)
        throw std::invalid_argument("sigma map returned the wrong number of arms");
    for (std::size_t a = 0; a < num_arms; ++a) {
        const double v = rate_V(a, sigmas);
        if (v < best.value) best = {v, mu, a};
    }
}

std::vector<double> grid_points(double lower, double upper, double step)
{
    std::vector<double> pts;
    const auto n = static_cast<std::size_t>(std::floor((upper - lower) / step + 1e-9));
    pts.reserve(n + 2);
    for (std::size_t i = 0; i <= n; ++i) pts.push_back(lower + static_cast<double>(i) * step);
    if (pts.back() < upper) pts.push_back(upper);
    return pts;
}

}  // namespace

double rate_V(std::size_t a, std::span<const double> sigmas)
{
    require_positive(sigmas);
    if (a >= sigmas.size()) throw std::out_of_range("arm index out of range");
    double rest = 0.0;
    for (std::size_t b = 0; b < sigmas.size(); ++b)
        if (b != a) rest += sigmas[b] * sigmas[b];
    const double denom = sigmas[a] + std::sqrt(rest);
    return 1.0 / (2.0 * denom * denom);
}

RateReport v_star(const SigmaMap& sigma_of_mu, const ThetaGrid& theta, std::size_t num_arms)
{
    if (num_arms < 2) throw std::invalid_argument("need at least 2 arms");
    if (!(theta.lower <= theta.upper) || !std::isfinite(theta.lower) || !std::isfinite(theta.upper))
        throw std::invalid_argument("empty theta grid");

    GridMin best;
    if (theta.lower == theta.upper) {
        scan(sigma_of_mu, num_arms, theta.lower, best);
    } else {
        if (!(theta.step > 0.0) || theta.step > (theta.upper - theta.lower) / 10.0)
            throw std::invalid_argument("theta step must lie in (0, (upper - lower) / 10]");
        for (double mu : grid_points(theta.lower, theta.upper, theta.step))
            scan(sigma_of_mu, num_arms, mu, best);
        const double lo = std::max(theta.lower, best.mu - theta.step);
        const double hi = std::min(theta.upper, best.mu + theta.step);
        for (double mu : grid_points(lo, hi, theta.step / 100.0))
            scan(sigma_of_mu, num_arms, mu, best);
    }

    std::vector<double> sigmas = sigma_of_mu(best.mu);
    std::vector<double> rates(num_arms);
    for (std::size_t a = 0; a < num_arms; ++a) rates[a] = rate_V(a, sigmas);
    Weights w = gna_target_weights(best.arm, sigmas);
    return RateReport{std::move(rates), best.value, best.arm, best.mu, std::move(sigmas),
                      std::move(w)};
}

BernoulliClosedForms bernoulli_closed_forms(std::size_t num_arms, const ThetaGrid& theta)
{
    if (num_arms < 2) throw std::invalid_argument("need K >= 2");
    if (!(theta.lower > 0.0 && theta.upper < 1.0))
        throw std::invalid_argument("Bernoulli theta must lie inside (0, 1)");
    const double root = std::sqrt(static_cast<double>(num_arms - 1));
    BernoulliClosedForms out;
    out.w_best = 1.0 / (1.0 + root);
    out.w_other = 1.0 / (static_cast<double>(num_arms - 1) + root);
    const double printed = 0.5 + std::sqrt(static_cast<double>(num_arms - 1) * 0.5);
    out.v_star_printed = 1.0 / (2.0 * printed * printed);
    const RateReport report = v_star(
        [num_arms](double mu) {
            return std::vector<double>(num_arms, std::sqrt(mu * (1.0 - mu)));
        },
        theta, num_arms);
    out.v_star_derived = report.v_star;
    out.mu_dagger = report.mu_dagger;
    return out;
}

double pairwise_rate(const Weights& w, std::span<const double> sigmas, std::size_t a_star,
                     std::size_t a, double delta)
{
    require_positive(sigmas);
    if (w.size() != sigmas.size()) throw std::invalid_argument("weights and sigmas disagree on K");
    if (a_star >= w.size() || a >= w.size()) throw std::out_of_range("arm index out of range");
    if (a == a_star) throw std::invalid_argument("pairwise rate needs a != a_star");
    if (!(delta > 0.0)) throw std::invalid_argument("gap must be > 0");
    if (!(w[a_star] > 0.0) || !(w[a] > 0.0)) throw std::invalid_argument("zero weight");
    const double load = sigmas[a_star] * sigmas[a_star] / w[a_star] + sigmas[a] * sigmas[a] / w[a];
    return delta * delta / (2.0 * load);
}

double kl_gaussian(double mu, double nu, double sigma2)
{
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
    const double d = mu - nu;
    return d * d / (2.0 * sigma2);
}

double kl_bernoulli(double p, double q)
{
    if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0))
        throw std::invalid_argument("Bernoulli KL needs p, q in (0, 1)");
    return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

double binary_relative_entropy(double x, double y)
{
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
        throw std::invalid_argument("binary relative entropy needs x, y in [0, 1]");
    if (y == 0.0 || y == 1.0) {
        if (x == y) return 0.0;
        throw std::invalid_argument("d(x, y) is infinite for y in {0, 1} and x != y");
    }
    return xlogx_ratio(x, y) + xlogx_ratio(1.0 - x, 1.0 - y);
}

double fisher_information(const OutcomeModel& model, double mu)
{
    if (model.family == Family::Gaussian) {
        if (!(model.sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
        return 1.0 / model.sigma2;
    }
    if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("Bernoulli mean must lie in (0, 1)");
    return 1.0 / (mu * (1.0 - mu));
}

double small_gap_ratio(const OutcomeModel& model, double mu, double delta)
{
    if (delta == 0.0 || !std::isfinite(delta)) throw std::invalid_argument("delta must be nonzero");
    if (model.family == Family::Gaussian) {
        // kl = delta^2 / (2 sigma^2) is exactly quadratic, so the ratio is the
        // constant itself; dividing a rounded delta^2 back out would not be.
        if (!(model.sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
        return 1.0 / (2.0 * model.sigma2);
    }
    const double nu = mu + delta;
    if (!(mu > 0.0 && mu < 1.0 && nu > 0.0 && nu < 1.0))
        throw std::invalid_argument("mu and mu + delta must lie in (0, 1)");
    const double d = nu - mu;  // the gap actually represented
    return kl_bernoulli(mu, nu) / (d * d);
}

KktReport kkt_verify(std::span<const double> sigmas, std::size_t best)
{
    const Weights w = gna_target_weights(best, sigmas);
    const std::size_t k = sigmas.size();
    const double var_best = sigmas[best] * sigmas[best];
    double rest = 0.0;
    for (std::size_t a = 0; a < k; ++a)
        if (a != best) rest += sigmas[a] * sigmas[a];
    const double s_rest = std::sqrt(rest);

    KktReport rep;
    const std::size_t first = best == 0 ? 1 : 0;
    const double load_first = var_best / w[best] + sigmas[first] * sigmas[first] / w[first];
    rep.rate = 1.0 / load_first;
    rep.rate_identity = std::abs(rep.rate * (sigmas[best] + s_rest) * (sigmas[best] + s_rest) - 1.0);

    double balance_sum = 0.0;
    double load_min = std::numeric_limits<double>::infinity();
    double load_max = 0.0;
    double lambda_sum_load = 0.0;  // sum_a s_a^2 (var_best/w_best + s_a^2/w_a)
    for (std::size_t a = 0; a < k; ++a) {
        if (a == best) continue;
        const double var = sigmas[a] * sigmas[a];
        balance_sum += w[a] * w[a] / var;
        load_min = std::min(load_min, var / w[a]);
        load_max = std::max(load_max, var / w[a]);
        lambda_sum_load += var * (var_best / w[best] + var / w[a]);
    }
    rep.balance = std::abs(w[best] - std::sqrt(var_best * balance_sum));
    rep.equal_loads = (load_max - load_min) / load_max;

    // Stationarity in R fixes the multiplier scale: 1 - c sum s_a^2 L_a = 0.
    rep.lambda_scale = 1.0 / lambda_sum_load;
    // d/dw_best: gamma = -R sum lambda_a var_best / w_best^2
    // d/dw_a:    gamma = -R lambda_a s_a^2 / w_a^2
    rep.gamma = rep.rate * rep.lambda_scale * rest * var_best / (w[best] * w[best]);
    double stationarity = 0.0;
    double gamma_identity = 0.0;
    const double s_best = sigmas[best];
    rep.gamma_closed_form = (s_best * s_rest + rest) * (s_best * s_rest + rest);
    const double norm = s_best * s_rest + rest;
    double rebuilt = std::abs(w[best] - s_best * s_rest / norm);
    for (std::size_t a = 0; a < k; ++a) {
        if (a == best) continue;
        const double var = sigmas[a] * sigmas[a];
        const double gamma_a = rep.rate * rep.lambda_scale * var * var / (w[a] * w[a]);
        stationarity = std::max(stationarity, std::abs(gamma_a - rep.gamma) / rep.gamma);
        gamma_identity = std::max(
            gamma_identity, std::abs(var * var / (w[a] * w[a]) - rep.gamma_closed_form) /
                                rep.gamma_closed_form);
        rebuilt = std::max(rebuilt, std::abs(w[a] - var / norm));
    }
    rep.stationarity = stationarity;
    rep.gamma_identity = gamma_identity;
    rep.multiplier_weights = rebuilt;
    rep.max_residual = std::max({rep.rate_identity, rep.balance, rep.equal_loads, rep.stationarity,
                                 rep.gamma_identity, rep.multiplier_weights});
    return rep;
}

}  // namespace gna
