#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gna {

/// A point in the interior of the probability simplex: every entry lies in
/// (0, 1) and the entries sum to one within 1e-12.
class Weights {
public:
    explicit Weights(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t a) const { return values_[a]; }
    std::span<const double> values() const { return values_; }
    const std::vector<double>& vector() const { return values_; }

    friend bool operator==(const Weights&, const Weights&) = default;

private:
    std::vector<double> values_;
};

inline constexpr double kSimplexTolerance = 1e-12;
inline constexpr double kDefaultEta = 1e-6;

/// Running per-arm statistics the adaptive rule sees at the start of a round.
struct VarianceEstimates {
    std::vector<double> sigma2_hat;   // floored variance estimates, each >= eta
    std::vector<double> mu_tilde;     // running sample means
    std::vector<std::size_t> counts;  // pulls so far
};

/// Target allocation for a known best arm and known standard deviations:
/// w_best = s_best / (s_best + sqrt(sum_{c != best} s_c^2)),
/// w_a    = (1 - w_best) * s_a^2 / sum_{c != best} s_c^2.
Weights gna_target_weights(std::size_t best, std::span<const double> sigmas);

/// Same rule evaluated at plug-in estimates; the best arm is the argmax of
/// mu_tilde (lowest index on ties).
Weights gna_estimated_weights(const VarianceEstimates& est);

/// Returns sigma2_tilde unless it is exactly zero, in which case eta.
double floor_variance(double sigma2_tilde, double eta);

Weights uniform_weights(std::size_t num_arms);

/// Glynn-Juneja allocation for Gaussian arms with known means and variances:
/// maximizes min_{a != best} gap_a^2 / (2 (var_best / w_best + var_a / w_a)).
///
/// Solved by nested bisection. The outer loop searches w_best for the balance
/// condition w_best^2 / var_best = sum_{a != best} w_a^2 / var_a. For fixed
/// w_best, the inner loop finds the common rate z at which the per-arm weights
/// w_a = var_a / (gap_a^2 / (2 z) - var_best / w_best) fill 1 - w_best.
/// Throws std::runtime_error if the residuals are not below tol within 10^4
/// iterations.
Weights gj_oracle_weights(std::span<const double> means, std::span<const double> variances,
                          double tol = 1e-10);

/// Mixes w with the uniform vector so every entry is at least w_min.
/// w_min = 0 returns w unchanged.
Weights apply_weight_floor(const Weights& w, double w_min);

namespace detail {

/// Allocation-free core of the target rule, for hot loops. `out` has the same
/// length as `variances`.
void neyman_weights_into(std::size_t best, std::span<const double> variances,
                         std::span<double> out);

/// In-place version of apply_weight_floor.
void mix_weight_floor(std::span<double> w, double w_min);

std::size_t argmax_lowest(std::span<const double> values);

}  // namespace detail

}  // namespace gna
