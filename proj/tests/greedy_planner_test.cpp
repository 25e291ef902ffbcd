#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "marls/exact.hpp"
#include "marls/greedy_planner.hpp"

using namespace marls;

TEST_CASE("sample count formula") {
    CHECK(sample_count_raw(0.1, 0.05, 2, 2, 2, 3) == doctest::Approx(50.0 * std::log(960.0)).epsilon(1e-12));
    CHECK(sample_count(0.1, 0.05, 2, 2, 2, 3) == 344);
    CHECK(sample_count(1.0, 0.5, 1, 1, 1, 1) == 1);
    const double diff = sample_count_raw(0.1, 0.05, 4, 2, 2, 3) - sample_count_raw(0.1, 0.05, 2, 2, 2, 3);
    CHECK(diff == doctest::Approx(std::log(2.0) / (2 * 0.01)).epsilon(1e-12));
}

TEST_CASE("deterministic prefix reproduces the exact marginal") {
    auto spec = fixtures::coverage_example_instance();
    TrajectoryBank bank(50, 1);
    for (std::size_t l = 0; l < 50; ++l) bank.at(l, 0) = {0, 0};
    const std::vector<TrajectoryBank> prefix{bank};
    const std::vector<AgentPolicy> exact_prefix{AgentPolicy(1, 1, 0)};
    for (int a = 0; a < 2; ++a)
        CHECK(estimate_marginal_reward(prefix, spec.oracle(), 0, {0, a}) ==
              exact_marginal_reward(spec, exact_prefix, 1, 0, 0, a));
    CHECK_THROWS(estimate_marginal_reward(std::span<const TrajectoryBank>{}, spec.oracle(), 0, {0, 0}));
}

TEST_CASE("modular estimates equal the pair value when uncontested") {
    ModularFunction f({{{0, 0}, 0.3}, {{1, 1}, 0.6}});
    TrajectoryBank bank(10, 1);
    for (std::size_t l = 0; l < 10; ++l) bank.at(l, 0) = {2, 0};
    const std::vector<TrajectoryBank> prefix{bank};
    auto t = estimate_marginal_rewards(prefix, f, 0, 2, 2);
    CHECK(t == std::vector<double>{0.3, 0.0, 0.0, 0.6});
}

TEST_CASE("estimates concentrate around the exact marginal") {
    auto spec = fixtures::generated(2, 2, 2, 2, 3);
    AgentPolicy pi0(2, 2, 1);
    const std::vector<AgentPolicy> exact_prefix{pi0};
    auto exact = exact_marginal_rewards(spec, exact_prefix, 1);
    int good = 0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
        Rng rng(static_cast<std::uint64_t>(r));
        const std::vector<TrajectoryBank> prefix{
            sample_trajectory_bank(spec.dynamics(0), pi0, spec.initial_state()[0], 10000, rng)};
        double worst = 0.0;
        for (int h = 0; h < 2; ++h) {
            auto est = estimate_marginal_rewards(prefix, spec.oracle(), h, 2, 2);
            for (std::size_t c = 0; c < 4; ++c) worst = std::max(worst, std::abs(est[c] - exact[h * 4 + c]));
        }
        good += worst <= 0.02 ? 1 : 0;
    }
    CHECK(good >= 99);
}

TEST_CASE("H=1 exact planning is partition greedy") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto spec = fixtures::generated(3, 2, 3, 1, seed);
        PlannerConfig c;
        c.use_exact_marginals = true;
        auto res = plan(spec, c);
        auto g = partition_matroid_greedy(spec.oracle(), spec.initial_state(), 3);
        for (int i = 0; i < 3; ++i) CHECK(res.policy.action(i, 0, spec.initial_state()[i]) == g[i]);
    }
}

TEST_CASE("coverage example plan") {
    auto spec = fixtures::coverage_example_instance();
    PlannerConfig c;
    c.use_exact_marginals = true;
    auto res = plan(spec, c);
    CHECK(res.policy.action(0, 0, 0) == 0);
    CHECK(res.policy.action(1, 0, 0) == 1);
    CHECK(evaluate_decomposable_policy(spec, res.policy) == 1.0);

    PlannerConfig sampled;
    sampled.seed = 4;
    auto s = plan(spec, sampled);
    CHECK(s.policy == res.policy);
    CHECK(s.diagnostics.theoretical_samples == sample_count(0.1, 0.05, 2, 1, 2, 1));
}

TEST_CASE("modular exact planning is optimal") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto spec = fixtures::generated(2, 3, 2, 3, seed, OracleKind::Modular);
        PlannerConfig c;
        c.use_exact_marginals = true;
        auto res = plan(spec, c);
        // Agents can collide only if they share a pair; V* ≥ greedy always.
        const double v = evaluate_decomposable_policy(spec, res.policy);
        CHECK(v <= joint_value_iteration(spec).value + 1e-9);
    }
}

TEST_CASE("planning is deterministic and respects the sample cap") {
    auto spec = fixtures::generated(2, 3, 2, 3, 9);
    PlannerConfig c;
    c.seed = 77;
    c.sample_cap = 100;
    auto a = plan(spec, c);
    auto b = plan(spec, c);
    CHECK(a.policy == b.policy);
    CHECK(a.diagnostics.samples_used == 100);
    CHECK(a.diagnostics.capped);
    CHECK_FALSE(a.diagnostics.warnings.empty());
    c.sample_override = 7;
    CHECK(plan(spec, c).diagnostics.samples_used == 7);
}
