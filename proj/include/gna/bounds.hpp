#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gna/allocation.hpp"
#include "gna/model.hpp"

namespace gna {

/// V(a, sigma) = 1 / (2 (s_a + sqrt(sum_{b != a} s_b^2))^2).
double rate_V(std::size_t a, std::span<const double> sigmas);

/// Discretized compact mean space. lower == upper is a single-point grid.
struct ThetaGrid {
    double lower = 0.0;
    double upper = 1.0;
    double step = 1e-3;
};

/// Maps a common mean parameter to the per-arm standard deviations.
using SigmaMap = std::function<std::vector<double>(double)>;

struct RateReport {
    std::vector<double> rates;  // V(a, mu_dagger) for every arm
    double v_star = 0.0;
    std::size_t argmin_arm = 0;
    double mu_dagger = 0.0;
    std::vector<double> sigmas;  // sigma(mu_dagger)
    Weights weights;             // target weights for argmin_arm at sigma(mu_dagger)
};

/// V* = min over (a, mu) of V(a, sigma(mu)) by a uniform grid on theta followed
/// by one refinement pass of step/100 around the grid argmin.
RateReport v_star(const SigmaMap& sigma_of_mu, const ThetaGrid& theta, std::size_t num_arms);

struct BernoulliClosedForms {
    double w_best = 0.0;
    double w_other = 0.0;
    /// 1 / (2 (0.5 + sqrt((K - 1) * 0.5))^2), the expression as commonly printed.
    double v_star_printed = 0.0;
    /// V* from the general rate formula with sigma(mu) = sqrt(mu (1 - mu)).
    double v_star_derived = 0.0;
    double mu_dagger = 0.0;
};

BernoulliClosedForms bernoulli_closed_forms(std::size_t num_arms,
                                            const ThetaGrid& theta = {0.1, 0.9, 1e-3});

/// Large-deviation exponent of the best-vs-a comparison:
/// delta^2 / (2 (s_best^2 / w_best + s_a^2 / w_a)).
double pairwise_rate(const Weights& w, std::span<const double> sigmas, std::size_t a_star,
                     std::size_t a, double delta);

double kl_gaussian(double mu, double nu, double sigma2);
double kl_bernoulli(double p, double q);
/// d(x, y) = x log(x/y) + (1-x) log((1-x)/(1-y)) with 0 log 0 = 0, so
/// d(0,0) = d(1,1) = 0.
double binary_relative_entropy(double x, double y);

/// A one-parameter outcome family for information quantities.
struct OutcomeModel {
    Family family = Family::Gaussian;
    double sigma2 = 1.0;  // Gaussian only
};

double fisher_information(const OutcomeModel& model, double mu);
/// kl(mu, mu + delta) / delta^2; tends to I(mu)/2 as delta -> 0.
double small_gap_ratio(const OutcomeModel& model, double mu, double delta);

/// Residuals of the max-min allocation program's KKT system at the closed
/// form weights. Multipliers are lambda_a = -c s_a^2 (the closed-form direction)
/// with c fixed by stationarity in R.
struct KktReport {
    double rate = 0.0;              // R = 1 / (s_best^2/w_best + s_a^2/w_a), common to all a
    double lambda_scale = 0.0;      // c
    double gamma = 0.0;             // simplex multiplier at that scale
    double gamma_closed_form = 0.0; // (s_best S + S^2)^2, S = sqrt(sum_{a != best} s_a^2)
    double rate_identity = 0.0;     // |R (s_best + S)^2 - 1|
    double balance = 0.0;           // |w_best - sqrt(s_best^2 sum w_a^2 / s_a^2)|
    double equal_loads = 0.0;       // spread of s_a^2 / w_a over a != best
    double stationarity = 0.0;      // max residual of the gradient conditions
    double multiplier_weights = 0.0;// weights rebuilt from lambda vs closed form
    double gamma_identity = 0.0;    // |-lambda_a s_a^2 / w_a^2 - gamma_tilde| relative, lambda = -s^2
    double max_residual = 0.0;
};

KktReport kkt_verify(std::span<const double> sigmas, std::size_t best);

}  // namespace gna
