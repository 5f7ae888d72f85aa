#include "gna/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gna {

std::string to_string(Family family)
{
    return family == Family::Gaussian ? "gaussian" : "bernoulli";
}

Family family_from_string(const std::string& name)
{
    if (name == "gaussian") return Family::Gaussian;
    if (name == "bernoulli") return Family::Bernoulli;
    throw std::invalid_argument("unknown distribution family '" + name + "'");
}

BanditInstance::BanditInstance(std::vector<ArmLaw> arms) : arms_(std::move(arms))
{
    if (arms_.size() < 2) throw std::invalid_argument("a bandit instance needs at least 2 arms");
    for (std::size_t a = 0; a < arms_.size(); ++a) {
        const ArmLaw& law = arms_[a];
        if (!std::isfinite(law.mean))
            throw std::invalid_argument("arm " + std::to_string(a) + ": mean must be finite");
        if (law.family == Family::Bernoulli) {
            if (!(law.mean > 0.0 && law.mean < 1.0))
                throw std::invalid_argument("arm " + std::to_string(a) +
                                            ": Bernoulli mean must lie in (0, 1)");
        } else if (!(law.sd > 0.0) || !std::isfinite(law.sd)) {
            throw std::invalid_argument("arm " + std::to_string(a) +
                                        ": standard deviation must be finite and > 0");
        }
    }
    best_ = 0;
    for (std::size_t a = 1; a < arms_.size(); ++a)
        if (arms_[a].mean > arms_[best_].mean) best_ = a;
    for (std::size_t a = 0; a < arms_.size(); ++a)
        if (a != best_ && arms_[a].mean == arms_[best_].mean)
            throw std::invalid_argument("non-unique best arm");
}

const ArmLaw& BanditInstance::arm(std::size_t a) const
{
    if (a >= arms_.size()) throw std::out_of_range("arm index out of range");
    return arms_[a];
}

double BanditInstance::gap(std::size_t a) const
{
    return arms_[best_].mean - arm(a).mean;
}

std::vector<double> BanditInstance::means() const
{
    std::vector<double> out;
    out.reserve(arms_.size());
    for (const auto& law : arms_) out.push_back(law.mean);
    return out;
}

std::vector<double> BanditInstance::sds() const
{
    std::vector<double> out;
    out.reserve(arms_.size());
    for (const auto& law : arms_) out.push_back(law.sd);
    return out;
}

std::vector<double> BanditInstance::variances() const
{
    std::vector<double> out;
    out.reserve(arms_.size());
    for (const auto& law : arms_) out.push_back(law.variance());
    return out;
}

std::vector<double> BanditInstance::gaps() const
{
    std::vector<double> out;
    out.reserve(arms_.size());
    for (std::size_t a = 0; a < arms_.size(); ++a) out.push_back(gap(a));
    return out;
}

BanditInstance make_gaussian_instance(std::span<const double> means, std::span<const double> sds)
{
    if (means.size() != sds.size())
        throw std::invalid_argument("means and sds must have equal length");
    std::vector<ArmLaw> arms;
    arms.reserve(means.size());
    for (std::size_t a = 0; a < means.size(); ++a)
        arms.push_back({Family::Gaussian, means[a], sds[a]});
    return BanditInstance(std::move(arms));
}

BanditInstance make_bernoulli_instance(std::span<const double> means)
{
    std::vector<ArmLaw> arms;
    arms.reserve(means.size());
    for (double m : means) {
        if (!(m > 0.0 && m < 1.0))
            throw std::invalid_argument("Bernoulli mean must lie in (0, 1)");
        arms.push_back({Family::Bernoulli, m, std::sqrt(m * (1.0 - m))});
    }
    return BanditInstance(std::move(arms));
}

double sample_outcome(const BanditInstance& instance, std::size_t arm, RngStream& rng)
{
    const ArmLaw& law = instance.arm(arm);
    if (law.family == Family::Bernoulli) return rng.uniform() < law.mean ? 1.0 : 0.0;
    return law.mean + law.sd * rng.standard_normal();
}

BanditInstance paper_instance_generator(const GeneratorSpec& spec, RngStream& rng)
{
    const std::size_t k = spec.num_arms;
    if (k < 3) throw std::invalid_argument("generator needs K >= 3");
    if (!(spec.sigma_bar > kSigmaFloorSd))
        throw std::invalid_argument("sigma_bar must exceed 0.1");
    if (spec.family != Family::Gaussian)
        throw std::invalid_argument(
            "generator patterns fix mu_1 = 1.0, which is not a valid Bernoulli mean");

    std::vector<double> means(k);
    means[0] = 1.0;
    if (spec.mu_pattern == "two-fixed" || spec.mu_pattern == "two-fixed-095") {
        means[1] = spec.mu_pattern == "two-fixed" ? 0.90 : 0.95;
        for (std::size_t a = 2; a < k; ++a) means[a] = 0.90 + 0.05 * rng.uniform();
    } else if (spec.mu_pattern == "all-095") {
        std::fill(means.begin() + 1, means.end(), 0.95);
    } else {
        throw std::invalid_argument("unsupported mean pattern '" + spec.mu_pattern + "'");
    }

    std::vector<double> sds(k);
    sds[0] = spec.sigma_bar;
    sds[1] = kSigmaFloorSd;
    for (std::size_t a = 2; a < k; ++a)
        sds[a] = kSigmaFloorSd + (spec.sigma_bar - kSigmaFloorSd) * rng.uniform();
    std::shuffle(sds.begin(), sds.end(), rng.engine());

    return make_gaussian_instance(means, sds);
}

}  // namespace gna
