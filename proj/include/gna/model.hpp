#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gna/rng.hpp"

namespace gna {

enum class Family { Gaussian, Bernoulli };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Marginal outcome law of one arm, parameterized by its mean.
struct ArmLaw {
    Family family = Family::Gaussian;
    double mean = 0.0;
    /// Standard deviation. For Bernoulli arms this is sqrt(mean * (1 - mean)).
    double sd = 1.0;

    double variance() const { return sd * sd; }
};

/// The true outcome distribution of a bandit problem. Immutable once built;
/// the constructor rejects anything without a unique best arm.
class BanditInstance {
public:
    explicit BanditInstance(std::vector<ArmLaw> arms);

    std::size_t num_arms() const { return arms_.size(); }
    const std::vector<ArmLaw>& arms() const { return arms_; }
    const ArmLaw& arm(std::size_t a) const;

    std::size_t best_arm() const { return best_; }
    /// mu_best - mu_a; zero for the best arm.
    double gap(std::size_t a) const;

    std::vector<double> means() const;
    std::vector<double> sds() const;
    std::vector<double> variances() const;
    std::vector<double> gaps() const;

private:
    std::vector<ArmLaw> arms_;
    std::size_t best_ = 0;
};

BanditInstance make_gaussian_instance(std::span<const double> means, std::span<const double> sds);
BanditInstance make_bernoulli_instance(std::span<const double> means);

/// One draw of arm `arm`'s outcome. Bernoulli draws are exactly 0.0 or 1.0.
double sample_outcome(const BanditInstance& instance, std::size_t arm, RngStream& rng);

/// Parameters of the randomized simulation-study instance family.
///
/// Mean patterns:
///   "two-fixed"      mu = (1.00, 0.90, U[0.90, 0.95], ...)
///   "two-fixed-095"  mu = (1.00, 0.95, U[0.90, 0.95], ...)
///   "all-095"        mu = (1.00, 0.95, 0.95, ...)
/// Standard deviations are a random permutation of
/// {sigma_bar, 0.1, u_3, ..., u_K} with u_i ~ U[0.1, sigma_bar].
struct GeneratorSpec {
    std::size_t num_arms = 3;
    std::string mu_pattern = "two-fixed";
    double sigma_bar = 5.0;
    Family family = Family::Gaussian;

    friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

inline constexpr double kSigmaFloorSd = 0.1;

BanditInstance paper_instance_generator(const GeneratorSpec& spec, RngStream& rng);

}  // namespace gna
