#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gna/engine.hpp"
#include "oracles.hpp"

using namespace gna;

namespace {

BanditInstance gaussian(std::vector<double> mu, std::vector<double> sd)
{
    return make_gaussian_instance(mu, sd);
}

AlgorithmSpec spec_of(AlgorithmKind kind)
{
    AlgorithmSpec s;
    s.kind = kind;
    return s;
}

constexpr AlgorithmKind kAllKinds[] = {AlgorithmKind::GNA, AlgorithmKind::GNAKnownVariance,
                                       AlgorithmKind::Uniform, AlgorithmKind::SuccessiveRejects,
                                       AlgorithmKind::GJOracle};

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("names round trip")
{
    for (auto k : kAllKinds) CHECK(algorithm_from_string(to_string(k)) == k);
    CHECK(estimator_from_string("A2IPW") == EstimatorKind::A2IPW);
    CHECK(estimator_from_string("SampleMean") == EstimatorKind::SampleMean);
    CHECK_THROWS(algorithm_from_string("Thompson"));
    CHECK_THROWS(estimator_from_string("median"));
}

TEST_CASE("default estimators")
{
    CHECK(spec_of(AlgorithmKind::GNA).resolved_estimator() == EstimatorKind::A2IPW);
    CHECK(spec_of(AlgorithmKind::GJOracle).resolved_estimator() == EstimatorKind::A2IPW);
    CHECK(spec_of(AlgorithmKind::Uniform).resolved_estimator() == EstimatorKind::SampleMean);
    AlgorithmSpec s = spec_of(AlgorithmKind::Uniform);
    s.estimator = EstimatorKind::A2IPW;
    CHECK(s.resolved_estimator() == EstimatorKind::A2IPW);
    s.label = "Uniform-A2IPW";
    CHECK(s.name() == "Uniform-A2IPW");
}

TEST_CASE("budget equal to K only initializes")
{
    const auto inst = gaussian({1.0, 0.5, 0.0}, {1.0, 1.0, 1.0});
    for (auto k : {AlgorithmKind::GNA, AlgorithmKind::Uniform, AlgorithmKind::GJOracle}) {
        RngStream rng(1, 0);
        History h(3);
        const RunOutcome out = run(spec_of(k), inst, 3, rng, &h);
        CHECK(out.counts == std::vector<std::size_t>{1, 1, 1});
        for (std::size_t t = 0; t < 3; ++t) {
            CHECK(h.records()[t].arm == t);
            CHECK(h.records()[t].weights_used == std::vector<double>(3, 1.0 / 3.0));
        }
    }
    RngStream rng(1, 0);
    CHECK_THROWS(run(spec_of(AlgorithmKind::GNA), inst, 2, rng));
}

TEST_CASE("counts are conserved and history is consistent")
{
    const auto inst = gaussian({1.0, 0.5, 0.2, 0.1}, {1.0, 2.0, 1.0, 0.5});
    for (auto kind : kAllKinds) {
        for (std::size_t T : {5u, 57u, 400u}) {
            RngStream rng(3, T);
            History h(4);
            const RunOutcome out = run(spec_of(kind), inst, T, rng, &h);
            CHECK(std::accumulate(out.counts.begin(), out.counts.end(), std::size_t{0}) == T);
            CHECK(h.rounds() == T);
            std::vector<double> sums(4, 0.0);
            for (const auto& r : h.records()) sums[r.arm] += r.outcome;
            for (std::size_t a = 0; a < 4; ++a) {
                CHECK(h.count(a) == out.counts[a]);
                CHECK(h.sum(a) == doctest::Approx(sums[a]).epsilon(1e-12));
            }
            CHECK(out.recommended == recommend(out.estimates));
        }
    }
}

TEST_CASE("recorded weights are simplex points and plug-ins respect truncation")
{
    const auto inst = gaussian({5.0, 0.0, -5.0}, {3.0, 1.0, 1.0});
    AlgorithmSpec s;
    s.c_mu = 2.0;
    RngStream rng(4, 4);
    History h(3);
    run(s, inst, 500, rng, &h);
    for (const auto& r : h.records()) {
        CHECK_NOTHROW(Weights(r.weights_used));
        for (double m : r.plugin_means) {
            CHECK(m <= 2.0);
            CHECK(m >= -2.0);
        }
    }
}

TEST_CASE("determinism")
{
    const auto inst = gaussian({1.0, 0.8, 0.7}, {2.0, 1.0, 0.5});
    for (auto kind : kAllKinds) {
        RngStream a(99, 7), b(99, 7);
        CHECK(run(spec_of(kind), inst, 300, a) == run(spec_of(kind), inst, 300, b));
    }
}

TEST_CASE("streaming A2IPW equals the history route and a from-scratch recomputation")
{
    const auto inst = gaussian({0.4, 0.1, 0.3}, {1.0, 0.5, 2.0});
    RngStream rng(12, 0);
    History h(3);
    const RunOutcome out = run(spec_of(AlgorithmKind::GNA), inst, 250, rng, &h);
    CHECK(a2ipw_estimates(h) == out.estimates);

    std::vector<std::size_t> arms;
    std::vector<double> ys;
    std::vector<std::vector<double>> ws;
    for (const auto& r : h.records()) {
        arms.push_back(r.arm);
        ys.push_back(r.outcome);
        ws.push_back(r.weights_used);
    }
    const auto ref = oracle::a2ipw_from_scratch(arms, ys, ws, 3);
    for (std::size_t a = 0; a < 3; ++a) CHECK(out.estimates[a] == doctest::Approx(ref[a]).epsilon(1e-10));
}

TEST_CASE("A2IPW hand examples")
{
    History h(2);
    h.append({1, 0, 1.0, {0.5, 0.5}, {0.0, 0.0}});
    h.append({2, 1, 0.4, {0.5, 0.5}, {0.0, 0.0}});
    const auto est = a2ipw_estimates(h);
    CHECK(est[0] == doctest::Approx(1.0));
    CHECK(est[1] == doctest::Approx(0.4));

    // Plug-ins are clamped to [-c_mu, c_mu].
    History c(2);
    c.append({1, 0, 1.0, {0.5, 0.5}, {10.0, -10.0}});
    const auto clamped = a2ipw_estimates(c, 1.0);
    CHECK(clamped[0] == doctest::Approx((1.0 - 1.0) / 0.5 + 1.0));
    CHECK(clamped[1] == doctest::Approx(-1.0));
}

TEST_CASE("A2IPW reduces to the sample mean with a zero plug-in and weight one")
{
    // K = 2 with a weight vector that keeps the unused arm legal.
    History h(2);
    const std::vector<double> ys{0.3, 1.7, -0.4, 2.2};
    for (std::size_t t = 0; t < ys.size(); ++t) h.append({t + 1, 0, ys[t], {1.0 - 1e-300, 1e-300}, {0.0, 0.0}});
    CHECK(a2ipw_estimates(h)[0] == doctest::Approx(0.95));
}

TEST_CASE("A2IPW errors name the round")
{
    History h(2);
    h.append({1, 0, 1.0, {0.5, 0.5}, {0.0, 0.0}});
    h.append({2, 0, 1.0, {1.0, 0.0}, {0.0, 0.0}});
    CHECK_THROWS_WITH(a2ipw_estimates(h), doctest::Contains("round 2"));
    History empty(2);
    CHECK_THROWS(a2ipw_estimates(empty));
    CHECK_THROWS(a2ipw_estimates(h, 0.0));
}

TEST_CASE("A2IPW is unbiased with exact plug-ins and true probabilities")
{
    // Random arms drawn with known probabilities, plug-in equal to the truth.
    const std::vector<double> mu{0.7, -0.2};
    const std::vector<double> w{0.3, 0.7};
    const auto inst = gaussian(mu, {1.0, 2.0});
    std::vector<double> e0, e1;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        RngStream rng(31, i);
        History h(2);
        for (std::size_t t = 1; t <= 50; ++t) {
            const std::size_t arm = rng.uniform() < w[0] ? 0 : 1;
            h.append({t, arm, sample_outcome(inst, arm, rng), w, mu});
        }
        const auto est = a2ipw_estimates(h);
        e0.push_back(est[0]);
        e1.push_back(est[1]);
    }
    const auto m0 = oracle::mean_se(e0);
    const auto m1 = oracle::mean_se(e1);
    CHECK(std::abs(m0.mean - mu[0]) <= 4.0 * m0.se);
    CHECK(std::abs(m1.mean - mu[1]) <= 4.0 * m1.se);
}

TEST_CASE("initialization rounds shift the A2IPW mean by a known amount")
{
    // With a near-deterministic instance every adaptive round contributes
    // mu_a exactly. Arm a's first pull contributes K y, and each later
    // initialization round adds the running mean, so the total sits
    // (K - 1 - a) mu_a / T above mu_a.
    const std::vector<double> mu{3.0, 2.0, 1.0};
    const auto inst = gaussian(mu, {1e-9, 1e-9, 1e-9});
    const std::size_t T = 100;
    RngStream rng(1, 1);
    AlgorithmSpec s = spec_of(AlgorithmKind::GNAKnownVariance);
    const RunOutcome out = run(s, inst, T, rng);
    for (std::size_t a = 0; a < 3; ++a) {
        const double expected = mu[a] + (2.0 - static_cast<double>(a)) * mu[a] / T;
        CHECK(out.estimates[a] == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("sample means")
{
    History h(2);
    h.append({1, 0, 2.0, {}, {0.0, 0.0}});
    h.append({2, 1, 3.0, {}, {2.0, 0.0}});
    h.append({3, 0, 4.0, {}, {2.0, 3.0}});
    CHECK(sample_means(h) == std::vector<double>{3.0, 3.0});
    History g(2);
    g.append({1, 0, 1.0, {}, {0.0, 0.0}});
    CHECK_THROWS(sample_means(g));
    CHECK_THROWS(a2ipw_estimates(g));
}

TEST_CASE("history validation")
{
    History h(2);
    CHECK_THROWS(h.append({1, 2, 0.0, {}, {0.0, 0.0}}));
    CHECK_THROWS(h.append({1, 0, 0.0, {1.0}, {0.0, 0.0}}));
    CHECK_THROWS(h.append({1, 0, 0.0, {}, {0.0}}));
    h.append({1, 0, 5.0, {}, {0.0, 0.0}});
    h.clear();
    CHECK(h.rounds() == 0);
    CHECK(h.count(0) == 0);
}

TEST_CASE("recommend breaks ties toward the lowest index")
{
    CHECK(recommend(std::vector<double>{1.0, 0.4}) == 0);
    CHECK(recommend(std::vector<double>{0.5, 0.5}) == 0);
    CHECK(recommend(std::vector<double>{0.1, 0.9, 0.3}) == 1);
    CHECK_THROWS(recommend(std::vector<double>{}));
}

TEST_CASE("successive rejects schedule")
{
    CHECK(successive_rejects_schedule(3, 100) == std::vector<std::size_t>{25, 37});
    CHECK(successive_rejects_schedule(2, 10).size() == 1);
    CHECK_THROWS(successive_rejects_schedule(3, 3));

    const auto inst = gaussian({1.0, 0.5, 0.0}, {1.0, 1.0, 1.0});
    RngStream rng(8, 8);
    History h(3);
    const RunOutcome out = run_successive_rejects(inst, 100, rng, &h);
    // 3 x 25 + 2 x 12 scheduled pulls, the last round goes to the survivor.
    std::size_t scheduled = 0;
    for (const auto& r : h.records()) scheduled += r.t <= 99;
    CHECK(scheduled == 99);
    CHECK(h.records().back().arm == out.recommended);
    CHECK(out.estimator == EstimatorKind::SampleMean);
    std::vector<std::size_t> sorted = out.counts;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{25, 37, 38});
}

TEST_CASE("successive rejects with two arms is uniform then argmax")
{
    const auto inst = gaussian({0.0, 1.0}, {1.0, 1.0});
    RngStream rng(2, 2);
    const RunOutcome out = run_successive_rejects(inst, 21, rng);
    // log-bar(2) = 1, so n_1 = ceil(19 / 2) = 10; the spare round goes to the survivor.
    CHECK(out.counts[out.recommended] == 11);
    CHECK(out.counts[1 - out.recommended] == 10);
}

TEST_CASE("huge gaps are identified")
{
    const auto inst = gaussian({5.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
    std::size_t errors = 0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        RngStream rng(17, i);
        errors += run_successive_rejects(inst, 200, rng).recommended != 0;
    }
    CHECK(errors <= 5);

    const auto two = gaussian({1.0, 0.5}, {1.0, 1.0});
    std::size_t right = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        RngStream rng(18, i);
        right += run(spec_of(AlgorithmKind::GNA), two, 500, rng).recommended == 0;
    }
    CHECK(right >= 950);
}

TEST_CASE("uniform allocates a third each")
{
    const auto inst = gaussian({1.0, 0.5, 0.0}, {1.0, 1.0, 1.0});
    std::vector<double> frac(3, 0.0);
    for (std::uint64_t i = 0; i < 200; ++i) {
        RngStream rng(5, i);
        const auto out = run(spec_of(AlgorithmKind::Uniform), inst, 3000, rng);
        for (std::size_t a = 0; a < 3; ++a) frac[a] += out.counts[a] / 3000.0 / 200.0;
    }
    for (double f : frac) {
        CHECK(f >= 0.31);
        CHECK(f <= 0.36);
    }
}

TEST_CASE("error rate does not grow with the budget")
{
    const auto inst = gaussian({1.0, 0.9, 0.9}, {2.0, 1.0, 1.0});
    std::vector<double> p;
    const std::size_t n = 1500;
    for (std::size_t T : {500u, 2000u, 8000u}) {
        std::size_t err = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            RngStream rng(6, i);
            err += run(spec_of(AlgorithmKind::GNA), inst, T, rng).recommended != 0;
        }
        p.push_back(static_cast<double>(err) / n);
    }
    for (std::size_t i = 1; i < p.size(); ++i) {
        const double se = std::sqrt((p[i] * (1 - p[i]) + p[i - 1] * (1 - p[i - 1])) / n);
        CHECK(p[i] <= p[i - 1] + 2.0 * se);
    }
}

TEST_CASE("exploration floor")
{
    CHECK(gna_round_floor(0.0, 0.0, 3, 10) == 0.0);
    CHECK(gna_round_floor(0.5, 0.0, 3, 4) == doctest::Approx(1.0 / 6.0));
    CHECK(gna_round_floor(0.5, 0.0, 3, 10000) == doctest::Approx(0.005));
    CHECK(gna_round_floor(0.5, 0.02, 3, 10000) == 0.02);

    AlgorithmSpec s;
    s.explore = -1.0;
    const auto inst = gaussian({1.0, 0.0}, {1.0, 1.0});
    RngStream rng(0, 0);
    CHECK_THROWS(run(s, inst, 10, rng));
}

TEST_CASE("unmodified rule starves arms whose first draw leaves the variance at eta")
{
    // With explore = 0 the weights after initialization come from eta-floored
    // variances, so an arm observed once can keep a weight of order eta.
    const auto inst = gaussian({1.0, 0.8, 0.8}, {2.0, 1.0, 1.0});
    AlgorithmSpec raw;
    raw.explore = 0.0;
    std::size_t starved_raw = 0, starved = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        RngStream a(21, i), b(21, i);
        const auto r = run(raw, inst, 2000, a);
        const auto s = run(AlgorithmSpec{}, inst, 2000, b);
        for (std::size_t arm = 0; arm < 3; ++arm) {
            starved_raw += r.counts[arm] <= 2;
            starved += s.counts[arm] <= 2;
        }
    }
    CHECK(starved_raw > 20);
    CHECK(starved == 0);
}

TEST_CASE("oracle kinds read moments from AlgorithmSpec when given")
{
    const auto inst = gaussian({1.0, 0.5, 0.0}, {1.0, 1.0, 1.0});
    AlgorithmSpec s = spec_of(AlgorithmKind::GJOracle);
    s.known_sds = {1.0, 1.0};
    RngStream rng(0, 0);
    CHECK_THROWS(run(s, inst, 10, rng));
    s.known_sds = {3.0, 1.0, 1.0};
    History h(3);
    run(s, inst, 10, rng, &h);
    CHECK(h.records().back().weights_used[0] > 0.5);
}

TEST_CASE("psi scores")
{
    const auto inst = gaussian({1.0, 0.8, 0.8}, {2.0, 1.0, 1.0});
    RngStream rng(1, 2);
    History h(3);
    run(AlgorithmSpec{}, inst, 50, rng, &h);
    const Weights target = gna_target_weights(0, inst.sds());
    const auto psi = psi_scores(h, inst, target);
    REQUIRE(psi.size() == 50);
    for (const auto& row : psi) CHECK(row[0] == 0.0);

    // Hand check of one row.
    const auto& r = h.records()[10];
    const double xb = r.arm == 0 ? (r.outcome - r.plugin_means[0]) / r.weights_used[0] + r.plugin_means[0]
                                 : r.plugin_means[0];
    const double x1 = r.arm == 1 ? (r.outcome - r.plugin_means[1]) / r.weights_used[1] + r.plugin_means[1]
                                 : r.plugin_means[1];
    const double v = 4.0 / target[0] + 1.0 / target[1];
    CHECK(psi[10][1] == doctest::Approx((xb - x1 - 0.2) / std::sqrt(v)));

    History sr(3);
    run_successive_rejects(inst, 20, rng, &sr);
    CHECK_THROWS(psi_scores(sr, inst, target));
}

}
