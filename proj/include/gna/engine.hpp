#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gna/allocation.hpp"
#include "gna/model.hpp"
#include "gna/rng.hpp"

namespace gna {

enum class AlgorithmKind { GNA, GNAKnownVariance, Uniform, SuccessiveRejects, GJOracle };
enum class EstimatorKind { A2IPW, SampleMean };

std::string to_string(AlgorithmKind kind);
AlgorithmKind algorithm_from_string(const std::string& name);
std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

inline constexpr double kDefaultTruncation = 1e6;
inline constexpr double kDefaultExplore = 0.5;

/// Floor GNA applies to every weight in adaptive round t:
/// max(w_min, min(1/(2K), explore / sqrt(t))). Vanishes as t grows, so the
/// limiting allocation is still the target. Without it an arm whose first draw
/// leaves its variance estimate at eta gets weight of order eta and can go
/// unsampled for the rest of the run.
double gna_round_floor(double explore, double w_min, std::size_t num_arms, std::size_t t);

struct AlgorithmSpec {
    AlgorithmKind kind = AlgorithmKind::GNA;
    double eta = kDefaultEta;             // variance floor
    double c_mu = kDefaultTruncation;     // plug-in mean truncation
    double w_min = 0.0;                   // optional per-arm weight floor, 0 = off
    double explore = kDefaultExplore;     // GNA only; 0 with w_min = 0 is the unmodified rule
    /// Final estimator. Unset means the kind's default: sample means for
    /// Uniform (empirical best arm) and SuccessiveRejects, A2IPW otherwise.
    std::optional<EstimatorKind> estimator;
    /// Oracle moments for GNAKnownVariance / GJOracle. Empty means "take them
    /// from the instance being run", which is what the harness does.
    std::vector<double> known_sds;
    std::vector<double> known_means;
    /// Display name used in result files; defaults to the kind's name.
    std::string label;

    std::string name() const { return label.empty() ? to_string(kind) : label; }
    EstimatorKind resolved_estimator() const;

    friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

struct RoundRecord {
    std::size_t t = 0;  // 1-based round index
    std::size_t arm = 0;
    double outcome = 0.0;
    std::vector<double> weights_used;
    std::vector<double> plugin_means;  // truncated running means before round t
};

/// Materialized filtration: every round's record plus per-arm running sums.
class History {
public:
    explicit History(std::size_t num_arms);

    void append(RoundRecord record);
    void clear();

    std::size_t num_arms() const { return count_.size(); }
    std::size_t rounds() const { return records_.size(); }
    const std::vector<RoundRecord>& records() const { return records_; }

    std::size_t count(std::size_t a) const { return count_[a]; }
    double sum(std::size_t a) const { return sum_[a]; }
    double sum_squares(std::size_t a) const { return sumsq_[a]; }

private:
    std::vector<RoundRecord> records_;
    std::vector<std::size_t> count_;
    std::vector<double> sum_;
    std::vector<double> sumsq_;
};

struct RunOutcome {
    std::size_t recommended = 0;
    std::vector<double> estimates;
    std::vector<std::size_t> counts;
    EstimatorKind estimator = EstimatorKind::A2IPW;

    friend bool operator==(const RunOutcome&, const RunOutcome&) = default;
};

/// One trial of `spec` on `instance` with budget T.
///
/// Rounds 1..K pull arm t with weights 1/K. Rounds K+1..T draw the arm from
/// the kind's weights by inverse CDF over one uniform. SuccessiveRejects is
/// dispatched to run_successive_rejects. If `history` is given it is cleared
/// and receives every round.
RunOutcome run(const AlgorithmSpec& spec, const BanditInstance& instance, std::size_t budget,
               RngStream& rng, History* history = nullptr);

/// mu_hat_a = (1/T) sum_t [1[A_t = a] (Y_t - m_{a,t}) / w_{a,t} + m_{a,t}],
/// with m the recorded plug-in means clamped to [-c_mu, c_mu].
std::vector<double> a2ipw_estimates(const History& history, double c_mu = kDefaultTruncation);

std::vector<double> sample_means(const History& history);

/// argmax with ties going to the lowest index.
std::size_t recommend(std::span<const double> estimates);

/// Successive Rejects with log-bar(K) = 1/2 + sum_{i=2}^K 1/i and phase
/// lengths n_k = ceil((T - K) / (log-bar(K) (K + 1 - k))). Each phase tops
/// surviving arms up to n_k pulls, then drops the lowest sample mean (highest
/// index on ties). Rounds left over after the schedule go to the survivor.
RunOutcome run_successive_rejects(const BanditInstance& instance, std::size_t budget,
                                  RngStream& rng, History* history = nullptr);

/// Cumulative per-arm pull targets n_1..n_{K-1} of the schedule above.
std::vector<std::size_t> successive_rejects_schedule(std::size_t num_arms, std::size_t budget);

/// Per-round standardized score for the contrast best-vs-a:
/// Psi_{a,t} = (xi_best,t - xi_a,t - gap_a) / sqrt(V(a)), where xi is the
/// per-round A2IPW term and V(a) = var_best / w_best + var_a / w_a at the
/// supplied target weights. Returns scores[t][a], zero for a = best.
std::vector<std::vector<double>> psi_scores(const History& history, const BanditInstance& instance,
                                            const Weights& target, double c_mu = kDefaultTruncation);

}  // namespace gna
