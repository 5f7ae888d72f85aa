#include <doctest.h>

#include <cmath>
#include <random>

#include "gna/allocation.hpp"
#include "gna/bounds.hpp"
#include "oracles.hpp"

using namespace gna;

namespace {

// Frozen hand evaluations of the target rule.
constexpr double kW2Best = 0.5857864376269050;   // 2 - sqrt(2)
constexpr double kW2Other = 0.2071067811865475;  // (sqrt(2) - 1) / 2
constexpr double kEqualBest3 = 0.4142135623730950;
constexpr double kEqualOther3 = 0.2928932188134525;

std::vector<double> random_sigmas(std::mt19937_64& gen, std::size_t k, double lo = 0.1, double hi = 5.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> s(k);
    for (double& x : s) x = u(gen);
    return s;
}

}  // namespace

TEST_SUITE("allocation") {

TEST_CASE("weights validate the simplex")
{
    CHECK_NOTHROW(Weights({0.25, 0.75}));
    CHECK_THROWS(Weights({0.0, 1.0}));
    CHECK_THROWS(Weights({0.5, 0.6}));
    CHECK_THROWS(Weights({1.0}));
    CHECK_THROWS(Weights({-0.1, 1.1}));
}

TEST_CASE("target weights, hand evaluated")
{
    const Weights w = gna_target_weights(0, std::vector<double>{2.0, 1.0, 1.0});
    CHECK(w[0] == doctest::Approx(kW2Best).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(kW2Other).epsilon(1e-14));
    CHECK(w[2] == doctest::Approx(kW2Other).epsilon(1e-14));

    const Weights e = gna_target_weights(0, std::vector<double>{1.0, 1.0, 1.0});
    CHECK(std::abs(e[0] - kEqualBest3) < 1e-15);
    CHECK(std::abs(e[1] - kEqualOther3) < 1e-15);

    const Weights h = gna_target_weights(0, std::vector<double>{1.0, 1.0});
    CHECK(h[0] == 0.5);
    CHECK(h[1] == 0.5);
}

TEST_CASE("best arm need not be the first")
{
    const Weights w = gna_target_weights(2, std::vector<double>{1.0, 1.0, 2.0});
    CHECK(w[2] == doctest::Approx(kW2Best).epsilon(1e-14));
    CHECK(w[0] == doctest::Approx(kW2Other).epsilon(1e-14));
}

TEST_CASE("two arms give the Neyman ratio exactly")
{
    std::mt19937_64 gen(11);
    for (int i = 0; i < 200; ++i) {
        const auto s = random_sigmas(gen, 2);
        const Weights w = gna_target_weights(0, s);
        CHECK(w[0] == s[0] / (s[0] + s[1]));
        CHECK(w[1] == s[1] / (s[0] + s[1]));
    }
}

TEST_CASE("scale invariance")
{
    std::mt19937_64 gen(5);
    for (int i = 0; i < 100; ++i) {
        auto s = random_sigmas(gen, 4);
        const Weights w = gna_target_weights(1, s);
        for (double& x : s) x *= 7.3;
        const Weights v = gna_target_weights(1, s);
        for (std::size_t a = 0; a < 4; ++a) CHECK(std::abs(w[a] - v[a]) <= 1e-12);
    }
}

TEST_CASE("balance and equal loads hold for random sigmas")
{
    std::mt19937_64 gen(2024);
    for (int i = 0; i < 200; ++i) {
        const std::size_t k = 2 + i % 5;
        const auto s = random_sigmas(gen, k);
        const std::size_t best = i % k;
        const Weights w = gna_target_weights(best, s);
        double sum = 0.0;
        for (std::size_t a = 0; a < k; ++a)
            if (a != best) sum += w[a] * w[a] / (s[a] * s[a]);
        CHECK(std::abs(w[best] - std::sqrt(s[best] * s[best] * sum)) <= 1e-10);
        double lo = 1e300, hi = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            if (a == best) continue;
            lo = std::min(lo, s[a] * s[a] / w[a]);
            hi = std::max(hi, s[a] * s[a] / w[a]);
        }
        CHECK(hi - lo <= 1e-10 * hi);
    }
}

TEST_CASE("target weights match the brute-force max-min optimum")
{
    const std::vector<double> s{2.0, 1.0, 1.0};
    const auto grid = oracle::bruteforce_maxmin_weights(
        [&](std::span<const double> w) { return oracle::unit_gap_min_rate(w, s, 0); }, 3, 0.005);
    const Weights w = gna_target_weights(0, s);
    for (std::size_t a = 0; a < 3; ++a) CHECK(std::abs(grid.weights[a] - w[a]) <= 0.005);
    CHECK(oracle::unit_gap_min_rate(w.values(), s, 0) >= grid.value);

    const auto two = oracle::bruteforce_maxmin_weights(
        [&](std::span<const double> w2) {
            return oracle::unit_gap_min_rate(w2, std::vector<double>{1.0, 1.0}, 0);
        },
        2, 0.01);
    CHECK(two.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("estimated weights")
{
    VarianceEstimates est{{4.0, 1.0, 1.0}, {1.0, 0.5, 0.5}, {3, 3, 3}};
    const Weights w = gna_estimated_weights(est);
    const Weights t = gna_target_weights(0, std::vector<double>{2.0, 1.0, 1.0});
    for (std::size_t a = 0; a < 3; ++a) CHECK(w[a] == doctest::Approx(t[a]).epsilon(1e-14));

    est = {{1e-6, 1e-6, 1e-6}, {1.0, 0.0, 0.0}, {1, 1, 1}};
    CHECK(gna_estimated_weights(est)[0] == doctest::Approx(kEqualBest3).epsilon(1e-12));

    // Tie on the running means: the lowest index is the estimated best.
    est = {{1.0, 9.0, 1.0}, {0.5, 0.5, 0.1}, {2, 2, 2}};
    const Weights tie = gna_estimated_weights(est);
    CHECK(tie[0] == doctest::Approx(gna_target_weights(0, std::vector<double>{1.0, 3.0, 1.0})[0]));

    est.counts = {2, 0, 2};
    CHECK_THROWS(gna_estimated_weights(est));
}

TEST_CASE("variance floor")
{
    CHECK(floor_variance(0.0, 1e-6) == 1e-6);
    CHECK(floor_variance(2.5, 1e-6) == 2.5);
    CHECK(floor_variance(1e-9, 1e-6) == 1e-9);
    CHECK_THROWS(floor_variance(-1.0, 1e-6));
    CHECK_THROWS(floor_variance(1.0, 0.0));
}

TEST_CASE("uniform weights")
{
    CHECK(uniform_weights(2).vector() == std::vector<double>{0.5, 0.5});
    CHECK(uniform_weights(5)[4] == doctest::Approx(0.2));
    CHECK_THROWS(uniform_weights(1));
}

TEST_CASE("weight floor mixes with uniform")
{
    const Weights w({0.9, 0.05, 0.05});
    const Weights f = apply_weight_floor(w, 0.1);
    CHECK(f[1] == doctest::Approx(0.7 * 0.05 + 0.1));
    CHECK(apply_weight_floor(w, 0.0) == w);
    CHECK_THROWS(apply_weight_floor(w, 0.34));
}

TEST_CASE("oracle allocation, two arms")
{
    const Weights w = gj_oracle_weights(std::vector<double>{1.0, 0.2}, std::vector<double>{9.0, 1.0});
    CHECK(w[0] == doctest::Approx(0.75).epsilon(1e-9));
    const Weights s = gj_oracle_weights(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 1.0});
    CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("oracle allocation matches the refined grid optimum")
{
    const std::vector<double> mu{1.0, 0.9, 0.5};
    const std::vector<double> var{1.0, 1.0, 1.0};
    const Weights w = gj_oracle_weights(mu, var);
    auto obj = [&](std::span<const double> x) { return oracle::gaussian_min_rate(x, mu, var); };
    const auto grid = oracle::bruteforce_maxmin_weights(obj, 3, 0.005);
    const auto fine = oracle::refined_maxmin_weights(obj, 3, 0.005);
    const double value = oracle::gaussian_min_rate(w.values(), mu, var);
    CHECK(std::abs(value - grid.value) <= 1e-4);
    CHECK(value >= grid.value);
    CHECK(value == doctest::Approx(fine.value).epsilon(1e-7));
    for (std::size_t a = 0; a < 3; ++a) CHECK(std::abs(w[a] - fine.weights[a]) <= 1e-4);
}

TEST_CASE("oracle allocation equalizes rates and balances")
{
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> u(0.3, 0.95);
    for (int i = 0; i < 30; ++i) {
        const std::size_t k = 3 + i % 3;
        std::vector<double> mu(k), var(k);
        mu[0] = 1.0;
        for (std::size_t a = 1; a < k; ++a) mu[a] = u(gen);
        const auto s = random_sigmas(gen, k, 0.2, 3.0);
        for (std::size_t a = 0; a < k; ++a) var[a] = s[a] * s[a];
        const Weights w = gj_oracle_weights(mu, var);
        double lo = 1e300, hi = 0.0, bal = 0.0;
        for (std::size_t a = 1; a < k; ++a) {
            const double g = mu[0] - mu[a];
            const double r = g * g / (2.0 * (var[0] / w[0] + var[a] / w[a]));
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            bal += w[a] * w[a] / var[a];
        }
        CHECK(hi - lo <= 1e-8 * hi);
        CHECK(std::abs(w[0] * w[0] / var[0] - bal) <= 1e-8 * bal);
    }
}

TEST_CASE("oracle allocation converges across wide random instances")
{
    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> sd(0.01, 10.0), mean(0.0, 0.999);
    for (int i = 0; i < 3000; ++i) {
        const std::size_t k = 2 + i % 8;
        std::vector<double> mu(k), var(k);
        mu[0] = 1.0;
        for (std::size_t a = 1; a < k; ++a) mu[a] = mean(gen);
        for (double& v : var) v = std::pow(sd(gen), 2);
        CHECK_NOTHROW(gj_oracle_weights(mu, var));
    }
}

TEST_CASE("oracle allocation rejects bad input")
{
    CHECK_THROWS(gj_oracle_weights(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 1.0}));
    CHECK_THROWS(gj_oracle_weights(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, -1.0}));
    CHECK_THROWS(gj_oracle_weights(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0}));
    CHECK_THROWS(gj_oracle_weights(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 1.0}, 0.0));
}

TEST_CASE("grid oracle guards its domain")
{
    auto obj = [](std::span<const double>) { return 0.0; };
    CHECK_THROWS(oracle::bruteforce_maxmin_weights(obj, 5, 0.01));
    CHECK_THROWS(oracle::bruteforce_maxmin_weights(obj, 3, 0.5));
}

}
