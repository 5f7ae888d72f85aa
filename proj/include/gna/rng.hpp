#pragma once

#include <cstdint>
#include <random>

namespace gna {

/// Deterministic random stream owned by a single trial.
///
/// The engine seed is a splitmix64 mix of (master_seed, trial_index, purpose),
/// so the draws of trial i are identical no matter which worker executes it or
/// in which order trials are scheduled. Not thread-safe; never share one
/// stream between concurrent trials.
class RngStream {
public:
    enum class Purpose : std::uint64_t {
        Outcomes = 0,  // arm choices and outcome draws inside a run
        Instance = 1,  // random instance construction
    };

    RngStream(std::uint64_t master_seed, std::uint64_t trial_index,
              Purpose purpose = Purpose::Outcomes);

    /// Uniform on [0, 1).
    double uniform();
    double standard_normal();

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// splitmix64 finalizer; exposed for tests.
std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trial_index,
                          std::uint64_t purpose);

}  // namespace gna
