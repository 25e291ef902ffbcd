#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "marls/exact.hpp"
#include "marls/greedy_planner.hpp"
#include "marls/ucb_gvi.hpp"

using namespace marls;

TEST_CASE("iota") {
    CHECK(iota(2, 2, 100, 3, 2, 0.1) == doctest::Approx(std::log(288000.0)).epsilon(1e-14));
    CHECK(iota(2, 2, 100, 3, 2, 0.1) == doctest::Approx(12.5707).epsilon(1e-5));
    CHECK(iota(1, 1, 1, 1, 1, 0.6) == doctest::Approx(std::log(10.0)).epsilon(1e-14));
    CHECK(iota(2, 2, 100, 3, 2, 0.01) > iota(2, 2, 100, 3, 2, 0.1));
    CHECK_THROWS(iota(1, 1, 1, 1, 1, 6.0));
}

TEST_CASE("bonus") {
    CHECK(bonus(100, 3, 2, 12.5712) == doctest::Approx(3 * std::sqrt(0.502848) + 2.262816).epsilon(1e-12));
    CHECK(bonus(100, 3, 2, 12.5712) == doctest::Approx(4.3898).epsilon(1e-4));
    const double i = 12.5712;
    const double first = 3 * std::sqrt(2 * 2 * i / 100.0), second = 3 * 3 * 2 * i / 100.0;
    CHECK(bonus(400, 3, 2, i) == doctest::Approx(first / 2 + second / 4).epsilon(1e-12));
    CHECK(bonus(100, 3, 2, i, 0.0) == 0.0);
    CHECK(bonus(100, 3, 2, i, 0.5) == doctest::Approx(0.5 * bonus(100, 3, 2, i)));
    CHECK_THROWS(bonus(0, 3, 2, i));
}

TEST_CASE("learner sample count") {
    CHECK(learner_sample_count_raw(0.1, 0.1, 2, 2, 2, 3) ==
          doctest::Approx(4.0 * 9.0 / 0.02 * std::log(6.0 * 24 / 0.1)).epsilon(1e-12));
    CHECK(learner_sample_count(0.1, 0.1, 2, 2, 2, 3) ==
          static_cast<std::size_t>(std::ceil(learner_sample_count_raw(0.1, 0.1, 2, 2, 2, 3))));
}

TEST_CASE("counts and the empirical model") {
    Counts c(1, 1, 2, 2);
    c.update(0, 0, 0, 1, 1);
    CHECK(c.visits(0, 0, 0, 1) == 1);
    CHECK(c.transits(0, 0, 0, 1, 1) == 1);
    CHECK(c.visits(0, 0, 0, 0) == 0);
    CHECK(c.consistent(1));
    CHECK_FALSE(c.consistent(2));

    Counts d(1, 1, 2, 1);
    d.update(0, 0, 0, 0, 0);
    d.update(0, 0, 0, 0, 0);
    d.update(0, 0, 0, 0, 1);
    auto m = empirical_model(d);
    CHECK(m[0].row(0, 0, 0)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(m[0].row(0, 0, 0)[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK_FALSE(m[0].defined(0, 1, 0));

    auto b = bonus_table(d, 2.0, 1.0);
    CHECK(b(0, 0, 0, 0) == bonus(3, 1, 2, 2.0));
    CHECK(b(0, 0, 1, 0) == 1.0);
}

TEST_CASE("first episode plays action 0 everywhere") {
    auto spec = fixtures::generated(2, 3, 2, 3, 1);
    Counts c(2, 3, 3, 2);
    auto model = empirical_model(c);
    LearnerConfig cfg;
    Rng rng(0);
    auto ep = compute_policy_for_episode(spec, c, model, cfg, 10, 5.0, rng);
    CHECK(ep.policy == DecomposablePolicy(2, 3, 3, 0));
    for (double q : ep.tables[1].q) CHECK(q == 3.0);
}

TEST_CASE("fully explored deterministic instance matches the planner") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto spec = fixtures::generated(2, 3, 2, 3, seed, OracleKind::Coverage, GeneratorKind::DeterministicChain);
        Counts c(2, 3, 3, 2);
        for (int i = 0; i < 2; ++i)
            for (int h = 0; h < 3; ++h)
                for (int s = 0; s < 3; ++s)
                    for (int a = 0; a < 2; ++a) {
                        const auto row = spec.dynamics(i).row(h, s, a);
                        c.update(i, h, s, a, static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
                    }
        auto model = empirical_model(c);
        for (int i = 0; i < 2; ++i)
            for (int h = 0; h < 3; ++h)
                for (int s = 0; s < 3; ++s)
                    for (int a = 0; a < 2; ++a)
                        for (int t = 0; t < 3; ++t)
                            CHECK(model[i].row(h, s, a)[t] == spec.dynamics(i).row(h, s, a)[t]);
        LearnerConfig cfg;
        cfg.bonus_scale = 0.0;
        cfg.epsilon = 1e-9;
        Rng rng(3);
        auto ep = compute_policy_for_episode(spec, c, model, cfg, 5, 1.0, rng);
        PlannerConfig pc;
        pc.use_exact_marginals = true;
        CHECK(ep.policy == plan(spec, pc).policy);
    }
}

TEST_CASE("single agent uses exact singleton rewards") {
    auto spec = fixtures::generated(1, 2, 2, 2, 5);
    Counts c(1, 2, 2, 2);
    c.update(0, 1, 1, 0, 0);
    auto model = empirical_model(c);
    LearnerConfig cfg;
    cfg.epsilon = 0.2;
    Rng rng(0);
    auto ep = compute_policy_for_episode(spec, c, model, cfg, 1, 2.0, rng);
    const double expected = spec.oracle().eval(PairSet{{1, 0}}) + bonus(1, 2, 2, 2.0) + 0.2 / 2;
    CHECK(ep.tables[0].Q(1, 1, 0) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(ep.tables[0].Q(1, 1, 1) == 2.0);
    CHECK(ep.tables[0].V(1, 1) == 2.0);
}

TEST_CASE("one episode of learning") {
    auto spec = fixtures::generated(2, 2, 2, 2, 7);
    LearnerConfig cfg;
    cfg.episodes = 1;
    cfg.sample_override = 20;
    auto res = learn(spec, cfg);
    REQUIRE(res.log.size() == 1);
    const double vstar = joint_value_iteration(spec).value;
    const double v1 = evaluate_decomposable_policy(spec, DecomposablePolicy(2, 2, 2, 0));
    CHECK(res.v_star == vstar);
    CHECK(res.log.cumulative() == doctest::Approx(0.5 * vstar - v1).epsilon(1e-15));
    CHECK(res.log.entries()[0].half_vstar == 0.5 * vstar);
    CHECK(res.counts.consistent(1));
}

TEST_CASE("counts track every executed episode") {
    auto spec = fixtures::generated(2, 3, 2, 3, 2);
    LearnerConfig cfg;
    cfg.episodes = 30;
    cfg.sample_override = 30;
    auto res = learn(spec, cfg);
    CHECK(res.counts.consistent(30));
    CHECK(res.policies.size() == 30);
    std::int64_t total = 0;
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) total += res.counts.visits(1, 2, s, a);
    CHECK(total == 30);
    for (const auto& e : res.log.entries()) CHECK(e.increment == doctest::Approx(e.half_vstar - e.value_exec));
}

TEST_CASE("learning progresses on a deterministic modular instance") {
    auto spec = fixtures::generated(2, 3, 2, 3, 4, OracleKind::Modular, GeneratorKind::DeterministicChain);
    LearnerConfig cfg;
    cfg.episodes = 200;
    cfg.bonus_scale = 0.1;
    cfg.sample_override = 50;
    cfg.seed = 1;
    auto res = learn(spec, cfg);
    CHECK(res.log.mean_increment(151, 200) <= res.log.mean_increment(1, 50));
}

TEST_CASE("learning is deterministic") {
    auto spec = fixtures::generated(2, 3, 2, 3, 8);
    LearnerConfig cfg;
    cfg.episodes = 25;
    cfg.sample_override = 40;
    cfg.seed = 99;
    auto a = learn(spec, cfg);
    auto b = learn(spec, cfg);
    std::ostringstream x, y;
    a.log.write_csv(x);
    b.log.write_csv(y);
    CHECK(x.str() == y.str());
    CHECK(a.policies == b.policies);
    CHECK(x.str().rfind("episode,value_exec,half_vstar,increment,cumulative\n", 0) == 0);
}

TEST_CASE("monte carlo evaluation mode") {
    auto spec = fixtures::generated(2, 2, 2, 2, 3);
    LearnerConfig cfg;
    cfg.episodes = 3;
    cfg.sample_override = 10;
    cfg.evaluation = EvaluationMode::MonteCarlo;
    cfg.monte_carlo_episodes = 20000;
    auto res = learn(spec, cfg);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(res.log.entries()[k].value_exec ==
              doctest::Approx(evaluate_decomposable_policy(spec, res.policies[k])).epsilon(0.05));
}

TEST_CASE("optimism records") {
    auto spec = fixtures::generated(2, 2, 2, 2, 3);
    LearnerConfig cfg;
    cfg.episodes = 10;
    cfg.sample_override = 10;
    cfg.track_optimism = true;
    auto res = learn(spec, cfg);
    REQUIRE(res.optimism.size() == 10);
    for (const auto& o : res.optimism) CHECK(o.model_value >= o.true_value);
}
