#include "gna/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gna {

std::string to_string(AlgorithmKind kind)
{
    switch (kind) {
    case AlgorithmKind::GNA: return "GNA";
    case AlgorithmKind::GNAKnownVariance: return "GNAKnownVariance";
    case AlgorithmKind::Uniform: return "Uniform";
    case AlgorithmKind::SuccessiveRejects: return "SuccessiveRejects";
    case AlgorithmKind::GJOracle: return "GJOracle";
    }
    return "unknown";
}

AlgorithmKind algorithm_from_string(const std::string& name)
{
    for (auto kind : {AlgorithmKind::GNA, AlgorithmKind::GNAKnownVariance, AlgorithmKind::Uniform,
                      AlgorithmKind::SuccessiveRejects, AlgorithmKind::GJOracle})
        if (to_string(kind) == name) return kind;
    throw std::invalid_argument("unknown algorithm kind '" + name + "'");
}

std::string to_string(EstimatorKind kind)
{
    return kind == EstimatorKind::A2IPW ? "A2IPW" : "SampleMean";
}

EstimatorKind estimator_from_string(const std::string& name)
{
    if (name == "A2IPW") return EstimatorKind::A2IPW;
    if (name == "SampleMean") return EstimatorKind::SampleMean;
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

EstimatorKind AlgorithmSpec::resolved_estimator() const
{
    if (estimator) return *estimator;
    if (kind == AlgorithmKind::Uniform || kind == AlgorithmKind::SuccessiveRejects)
        return EstimatorKind::SampleMean;
    return EstimatorKind::A2IPW;
}

History::History(std::size_t num_arms)
    : count_(num_arms, 0), sum_(num_arms, 0.0), sumsq_(num_arms, 0.0)
{
}

void History::append(RoundRecord record)
{
    if (record.arm >= num_arms()) throw std::out_of_range("record arm index out of range");
    if (!record.weights_used.empty() && record.weights_used.size() != num_arms())
        throw std::invalid_argument("record weights have the wrong length");
    if (record.plugin_means.size() != num_arms())
        throw std::invalid_argument("record plug-in means have the wrong length");
    ++count_[record.arm];
    sum_[record.arm] += record.outcome;
    sumsq_[record.arm] += record.outcome * record.outcome;
    records_.push_back(std::move(record));
}

void History::clear()
{
    records_.clear();
    std::fill(count_.begin(), count_.end(), 0);
    std::fill(sum_.begin(), sum_.end(), 0.0);
    std::fill(sumsq_.begin(), sumsq_.end(), 0.0);
}

std::size_t recommend(std::span<const double> estimates)
{
    if (estimates.empty()) throw std::invalid_argument("no estimates to recommend from");
    return detail::argmax_lowest(estimates);
}

namespace {

struct RunningStats {
    explicit RunningStats(std::size_t k) : count(k, 0), sum(k, 0.0), sumsq(k, 0.0) {}

    void add(std::size_t a, double y)
    {
        ++count[a];
        sum[a] += y;
        sumsq[a] += y * y;
    }

    double mean(std::size_t a) const
    {
        return count[a] == 0 ? 0.0 : sum[a] / static_cast<double>(count[a]);
    }

    // Plug-in variance (divide by n), clamped at zero against round-off.
    double variance(std::size_t a) const
    {
        const double n = static_cast<double>(count[a]);
        const double m = sum[a] / n;
        return std::max(0.0, sumsq[a] / n - m * m);
    }

    std::vector<std::size_t> count;
    std::vector<double> sum;
    std::vector<double> sumsq;
};

std::size_t draw_arm(std::span<const double> w, double u)
{
    double cdf = 0.0;
    for (std::size_t a = 0; a < w.size(); ++a) {
        cdf += w[a];
        if (u < cdf) return a;
    }
    // u landed in the round-off sliver above the last partial sum.
    for (std::size_t a = w.size(); a-- > 0;)
        if (w[a] > 0.0) return a;
    return w.size() - 1;
}

// One A2IPW summand; shared by the streaming accumulator and a2ipw_estimates
// so both routes add identical terms in identical order.
inline double a2ipw_term(bool pulled, double y, double plugin, double w)
{
    return pulled ? (y - plugin) / w + plugin : plugin;
}

void validate_spec(const AlgorithmSpec& spec, std::size_t k)
{
    if (!(spec.eta > 0.0)) throw std::invalid_argument("eta must be > 0");
    if (!(spec.c_mu > 0.0)) throw std::invalid_argument("c_mu must be > 0");
    if (spec.w_min < 0.0 || spec.w_min * static_cast<double>(k) >= 1.0)
        throw std::invalid_argument("w_min must lie in [0, 1/K)");
    if (!(spec.explore >= 0.0)) throw std::invalid_argument("explore must be >= 0");
    if (!spec.known_sds.empty() && spec.known_sds.size() != k)
        throw std::invalid_argument("known_sds length does not match the instance");
    if (!spec.known_means.empty() && spec.known_means.size() != k)
        throw std::invalid_argument("known_means length does not match the instance");
}

}  // namespace

double gna_round_floor(double explore, double w_min, std::size_t num_arms, std::size_t t)
{
    const double decaying =
        std::min(0.5 / static_cast<double>(num_arms), explore / std::sqrt(static_cast<double>(t)));
    return std::max(w_min, decaying);
}

std::vector<std::size_t> successive_rejects_schedule(std::size_t num_arms, std::size_t budget)
{
    if (num_arms < 2) throw std::invalid_argument("successive rejects needs K >= 2");
    if (budget <= num_arms)
        throw std::invalid_argument("budget too small for the successive rejects schedule: need T > K");
    double log_bar = 0.5;
    for (std::size_t i = 2; i <= num_arms; ++i) log_bar += 1.0 / static_cast<double>(i);
    const double spare = static_cast<double>(budget - num_arms);
    std::vector<std::size_t> n(num_arms - 1);
    for (std::size_t k = 1; k < num_arms; ++k)
        n[k - 1] = static_cast<std::size_t>(
            std::ceil(spare / (log_bar * static_cast<double>(num_arms + 1 - k))));
    return n;
}

RunOutcome run_successive_rejects(const BanditInstance& instance, std::size_t budget,
                                  RngStream& rng, History* history)
{
    const std::size_t k = instance.num_arms();
    const std::vector<std::size_t> schedule = successive_rejects_schedule(k, budget);
    if (history) *history = History(k);

    RunningStats stats(k);
    std::vector<bool> alive(k, true);
    std::size_t t = 0;
    auto pull = [&](std::size_t arm) {
        std::vector<double> plugin;
        if (history) {
            plugin.resize(k);
            for (std::size_t a = 0; a < k; ++a) plugin[a] = stats.mean(a);
        }
        const double y = sample_outcome(instance, arm, rng);
        stats.add(arm, y);
        ++t;
        if (history) history->append({t, arm, y, {}, std::move(plugin)});
    };

    for (std::size_t phase = 0; phase + 1 < k; ++phase) {
        for (std::size_t a = 0; a < k; ++a)
            while (alive[a] && stats.count[a] < schedule[phase]) pull(a);
        // Drop the lowest sample mean; ties drop the highest index.
        std::size_t worst = k;
        for (std::size_t a = 0; a < k; ++a) {
            if (!alive[a]) continue;
            if (worst == k || stats.mean(a) <= stats.mean(worst)) worst = a;
        }
        alive[worst] = false;
    }
    const auto survivor =
        static_cast<std::size_t>(std::find(alive.begin(), alive.end(), true) - alive.begin());
    while (t < budget) pull(survivor);

    RunOutcome out;
    out.recommended = survivor;
    out.estimator = EstimatorKind::SampleMean;
    out.counts = stats.count;
    out.estimates.resize(k);
    for (std::size_t a = 0; a < k; ++a) out.estimates[a] = stats.mean(a);
    return out;
}

RunOutcome run(const AlgorithmSpec& spec, const BanditInstance& instance, std::size_t budget,
               RngStream& rng, History* history)
{
    const std::size_t k = instance.num_arms();
    if (budget < k) throw std::invalid_argument("budget T must be at least K");
    if (spec.kind == AlgorithmKind::SuccessiveRejects)
        return run_successive_rejects(instance, budget, rng, history);
    validate_spec(spec, k);
    if (history) *history = History(k);

    const EstimatorKind estimator = spec.resolved_estimator();
    const double inv_k = 1.0 / static_cast<double>(k);

    // Fixed allocations, and the oracle variances GNAKnownVariance plugs in.
    std::vector<double> fixed_w;
    std::vector<double> known_var;
    if (spec.kind == AlgorithmKind::Uniform) {
        fixed_w.assign(k, inv_k);
    } else if (spec.kind == AlgorithmKind::GJOracle) {
        const std::vector<double> means =
            spec.known_means.empty() ? instance.means() : spec.known_means;
        std::vector<double> var = instance.variances();
        if (!spec.known_sds.empty())
            for (std::size_t a = 0; a < k; ++a) var[a] = spec.known_sds[a] * spec.known_sds[a];
        fixed_w = gj_oracle_weights(means, var).vector();
    } else if (spec.kind == AlgorithmKind::GNAKnownVariance) {
        known_var = instance.variances();
        if (!spec.known_sds.empty())
            for (std::size_t a = 0; a < k; ++a) known_var[a] = spec.known_sds[a] * spec.known_sds[a];
    }
    if (!fixed_w.empty()) detail::mix_weight_floor(fixed_w, spec.w_min);

    RunningStats stats(k);
    std::vector<double> acc(k, 0.0);
    std::vector<double> w(k, inv_k);
    std::vector<double> plugin(k, 0.0);
    std::vector<double> mu_tilde(k, 0.0);
    std::vector<double> var_hat(k, 0.0);

    for (std::size_t t = 1; t <= budget; ++t) {
        for (std::size_t a = 0; a < k; ++a) {
            mu_tilde[a] = stats.mean(a);
            plugin[a] = std::clamp(mu_tilde[a], -spec.c_mu, spec.c_mu);
        }

        std::size_t arm;
        if (t <= k) {
            arm = t - 1;
            std::fill(w.begin(), w.end(), inv_k);
        } else {
            switch (spec.kind) {
            case AlgorithmKind::GNA:
                for (std::size_t a = 0; a < k; ++a)
                    var_hat[a] = floor_variance(stats.variance(a), spec.eta);
                detail::neyman_weights_into(detail::argmax_lowest(mu_tilde), var_hat, w);
                detail::mix_weight_floor(w, gna_round_floor(spec.explore, spec.w_min, k, t));
                break;
            case AlgorithmKind::GNAKnownVariance:
                detail::neyman_weights_into(detail::argmax_lowest(mu_tilde), known_var, w);
                detail::mix_weight_floor(w, spec.w_min);
                break;
            default:
                std::copy(fixed_w.begin(), fixed_w.end(), w.begin());
                break;
            }
            arm = draw_arm(w, rng.uniform());
        }

        const double y = sample_outcome(instance, arm, rng);
        if (estimator == EstimatorKind::A2IPW)
            for (std::size_t a = 0; a < k; ++a) acc[a] += a2ipw_term(a == arm, y, plugin[a], w[a]);
        stats.add(arm, y);
        if (history) history->append({t, arm, y, w, plugin});
    }

    RunOutcome out;
    out.estimator = estimator;
    out.counts = stats.count;
    out.estimates.resize(k);
    const double T = static_cast<double>(budget);
    for (std::size_t a = 0; a < k; ++a)
        out.estimates[a] = estimator == EstimatorKind::A2IPW ? acc[a] / T : stats.mean(a);
    out.recommended = recommend(out.estimates);
    return out;
}

std::vector<double> a2ipw_estimates(const History& history, double c_mu)
{
    if (!(c_mu > 0.0)) throw std::invalid_argument("c_mu must be > 0");
    const std::size_t k = history.num_arms();
    if (history.rounds() == 0) throw std::invalid_argument("history is empty");
    std::vector<double> acc(k, 0.0);
    for (const RoundRecord& r : history.records()) {
        if (r.weights_used.size() != k)
            throw std::invalid_argument("round " + std::to_string(r.t) +
                                        " carries no allocation weights");
        for (std::size_t a = 0; a < k; ++a) {
            if (!(r.weights_used[a] > 0.0))
                throw std::invalid_argument("zero allocation weight for arm " + std::to_string(a) +
                                            " in round " + std::to_string(r.t));
            const double plugin = std::clamp(r.plugin_means[a], -c_mu, c_mu);
            acc[a] += a2ipw_term(r.arm == a, r.outcome, plugin, r.weights_used[a]);
        }
    }
    const double T = static_cast<double>(history.rounds());
    for (double& x : acc) x /= T;
    return acc;
}

std::vector<double> sample_means(const History& history)
{
    std::vector<double> out(history.num_arms());
    for (std::size_t a = 0; a < out.size(); ++a) {
        if (history.count(a) == 0)
            throw std::invalid_argument("arm " + std::to_string(a) + " was never pulled");
        out[a] = history.sum(a) / static_cast<double>(history.count(a));
    }
    return out;
}

std::vector<std::vector<double>> psi_scores(const History& history, const BanditInstance& instance,
                                            const Weights& target, double c_mu)
{
    const std::size_t k = history.num_arms();
    if (instance.num_arms() != k || target.size() != k)
        throw std::invalid_argument("history, instance and target weights disagree on K");
    const std::size_t best = instance.best_arm();
    std::vector<double> scale(k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
        if (a != best)
            scale[a] = 1.0 / std::sqrt(instance.arm(best).variance() / target[best] +
                                       instance.arm(a).variance() / target[a]);

    std::vector<std::vector<double>> scores;
    scores.reserve(history.rounds());
    std::vector<double> xi(k);
    for (const RoundRecord& r : history.records()) {
        if (r.weights_used.size() != k)
            throw std::invalid_argument("round " + std::to_string(r.t) +
                                        " carries no allocation weights");
        for (std::size_t a = 0; a < k; ++a) {
            if (!(r.weights_used[a] > 0.0))
                throw std::invalid_argument("zero allocation weight in round " +
                                            std::to_string(r.t));
            xi[a] = a2ipw_term(r.arm == a, r.outcome, std::clamp(r.plugin_means[a], -c_mu, c_mu),
                               r.weights_used[a]);
        }
        std::vector<double> row(k, 0.0);
        for (std::size_t a = 0; a < k; ++a)
            if (a != best) row[a] = (xi[best] - xi[a] - instance.gap(a)) * scale[a];
        scores.push_back(std::move(row));
    }
    return scores;
}

}  // namespace gna
