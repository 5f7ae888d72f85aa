#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gna/engine.hpp"
#include "gna/model.hpp"

namespace gna {

/// Raised for malformed configuration or result files; the message names the
/// offending field or line.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;

struct InstanceConfig {
    enum class Type { Gaussian, Bernoulli, PaperGenerator };

    Type type = Type::Gaussian;
    std::vector<double> means;  // Gaussian / Bernoulli
    std::vector<double> sds;    // Gaussian
    GeneratorSpec generator;    // PaperGenerator
    /// PaperGenerator only: draw a new instance for every trial (true) or one
    /// instance shared by the whole experiment (false).
    bool fresh_per_trial = true;

    friend bool operator==(const InstanceConfig&, const InstanceConfig&) = default;
};

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    std::uint64_t master_seed = 0;
    std::size_t trials = 3000;
    std::vector<AlgorithmSpec> algorithms;
    InstanceConfig instance;
    std::vector<std::size_t> budgets;
    std::string output;       // results CSV
    std::string output_json;  // optional per-cell JSON, empty = none

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError when trials, budgets or algorithms are invalid.
void validate(const ExperimentConfig& config);

struct CellSummary {
    std::string algorithm;
    std::size_t budget = 0;
    std::size_t trials = 0;
    std::size_t errors = 0;
    double p_hat = 0.0;
    double se = 0.0;                  // sqrt(p_hat (1 - p_hat) / trials)
    std::vector<double> allocation;   // mean N_a(T) / T over trials

    friend bool operator==(const CellSummary&, const CellSummary&) = default;
};

/// Cells sorted by (algorithm, T).
struct ExperimentSummary {
    std::vector<CellSummary> cells;

    std::vector<CellSummary> cells_for(const std::string& algorithm) const;
    friend bool operator==(const ExperimentSummary&, const ExperimentSummary&) = default;
};

CellSummary make_cell(std::string algorithm, std::size_t budget, std::size_t trials,
                      std::size_t errors);

/// Runs every (algorithm, T) cell for `trials` independent trials. Trial i of
/// every cell uses RngStream(master_seed, i), so cells share random numbers
/// trial by trial. Tallies are integer sums, so the summary does not depend on
/// `workers` (0 = hardware concurrency).
ExperimentSummary run_experiment(const ExperimentConfig& config, unsigned workers = 0);

/// The instance trial `trial` of `config` runs on.
BanditInstance instance_for_trial(const InstanceConfig& instance, std::uint64_t master_seed,
                                  std::uint64_t trial);

struct DecayPoint {
    double budget = 0.0;
    double p_hat = 0.0;
    std::size_t trials = 0;  // optional; enables the binomial slope error
};

/// Least squares fit of log p_hat on T over points with 0 < p_hat < 1.
struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
    double slope_se = 0.0;           // from regression residuals
    double slope_se_binomial = 0.0;  // delta method, Var log p ~ (1 - p) / (n p); 0 if trials unknown
};

DecayFit fit_decay(const std::vector<DecayPoint>& points);
DecayFit fit_decay(const std::vector<CellSummary>& cells);

// Serialization -------------------------------------------------------------

ExperimentConfig parse_config(std::string_view json_text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig read_config(const std::string& path);
void write_config(const ExperimentConfig& config, const std::string& path);

/// Header `algorithm,T,trials,errors,p_hat,se`, floats with 6 decimals.
std::string results_csv(const ExperimentSummary& summary);
void write_results(const ExperimentSummary& summary, const std::string& path);
ExperimentSummary parse_results_csv(std::string_view csv_text);
ExperimentSummary read_results(const std::string& path);

/// Per-cell allocation fractions plus a decay fit per algorithm when one exists.
std::string results_json(const ExperimentSummary& summary);
void write_results_json(const ExperimentSummary& summary, const std::string& path);

}  // namespace gna
