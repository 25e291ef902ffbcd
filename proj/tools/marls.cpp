// Command-line front end: instance generation, planning, learning, exact
// oracles, submodularity checks, simulation and experiment configs.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "marls/exact.hpp"
#include "marls/greedy_planner.hpp"
#include "marls/harness.hpp"
#include "marls/io.hpp"
#include "marls/ucb_gvi.hpp"

namespace {

using marls::io::json;

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

json report_json(const marls::SubmodularityReport& r) {
    json out = {{"passed", r.passed}, {"checks", r.checks}, {"max_gain_gap", r.max_gain_gap}};
    if (r.witness) {
        auto pairs = [](const marls::PairSet& s) {
            json a = json::array();
            for (const auto& x : s) a.push_back({x.state, x.action});
            return a;
        };
        const auto& w = *r.witness;
        out["witness"] = {{"kind", w.kind == marls::SubmodularityViolation::Kind::NotMonotone ? "not_monotone"
                                                                                            : "not_submodular"},
                          {"A", pairs(w.smaller)},
                          {"B", pairs(w.larger)},
                          {"x", w.added ? json{w.added->state, w.added->action} : json(nullptr)},
                          {"values", {w.smaller_value, w.larger_value}}};
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent MDPs with submodular rewards: greedy planning, UCB learning, exact oracles"};
    app.require_subcommand(0, 1);

    std::string config_file;
    app.add_option("--config", config_file, "Run an experiment described by a JSON config");

    // generate ----------------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "Generate a random instance");
    marls::GeneratorSpec g;
    std::string gen_kind = "random-dirichlet", gen_oracle = "coverage", gen_out;
    gen->add_option("--kind", gen_kind, "random-dirichlet | deterministic-chain | drone-grid");
    gen->add_option("--states", g.num_states);
    gen->add_option("--actions", g.num_actions);
    gen->add_option("--agents", g.num_agents);
    gen->add_option("--horizon", g.horizon);
    gen->add_option("--oracle", gen_oracle, "coverage | facility_location | modular");
    gen->add_option("--objects", g.num_objects);
    gen->add_option("--density", g.coverage_density);
    gen->add_option("--grid-width", g.grid_width);
    gen->add_option("--grid-height", g.grid_height);
    gen->add_option("--radius", g.radius);
    gen->add_option("--seed", g.seed);
    gen->add_option("--out", gen_out, "Instance file to write")->required();

    // plan --------------------------------------------------------------------
    auto* plan_cmd = app.add_subcommand("plan", "Greedy policy optimization with known dynamics");
    std::string instance_file, out_path;
    marls::PlannerConfig pc;
    std::optional<std::size_t> plan_samples;
    plan_cmd->add_option("--instance", instance_file)->required();
    plan_cmd->add_option("--epsilon", pc.epsilon)->required();
    plan_cmd->add_option("--delta", pc.delta)->required();
    plan_cmd->add_flag("--exact-marginals", pc.use_exact_marginals);
    plan_cmd->add_option("--samples", plan_samples, "Override the number of sampled trajectories");
    plan_cmd->add_option("--sample-cap", pc.sample_cap);
    plan_cmd->add_option("--seed", pc.seed)->required();
    plan_cmd->add_option("--out", out_path, "Policy file to write")->required();

    // learn -------------------------------------------------------------------
    auto* learn_cmd = app.add_subcommand("learn", "UCB greedy value iteration with unknown dynamics");
    marls::LearnerConfig lc;
    std::string fallback = "self-loop";
    std::optional<std::size_t> learn_samples;
    learn_cmd->add_option("--instance", instance_file)->required();
    learn_cmd->add_option("--episodes", lc.episodes)->required();
    learn_cmd->add_option("--epsilon", lc.epsilon)->required();
    learn_cmd->add_option("--delta", lc.delta)->required();
    learn_cmd->add_option("--bonus-scale", lc.bonus_scale);
    learn_cmd->add_option("--fallback", fallback, "self-loop | uniform");
    learn_cmd->add_option("--samples", learn_samples, "Override the synthetic sample count");
    learn_cmd->add_option("--sample-cap", lc.sample_cap);
    learn_cmd->add_flag("--track-optimism", lc.track_optimism);
    learn_cmd->add_option("--seed", lc.seed)->required();
    learn_cmd->add_option("--out", out_path, "Output directory")->required();

    // exact -------------------------------------------------------------------
    auto* exact_cmd = app.add_subcommand("exact", "Exact optimal value, or exact value of a policy");
    std::string policy_file;
    exact_cmd->add_option("--instance", instance_file)->required();
    exact_cmd->add_option("--policy", policy_file);

    // check-submodular --------------------------------------------------------
    auto* check_cmd = app.add_subcommand("check-submodular", "Exhaustive monotonicity/submodularity check");
    std::string oracle_file;
    std::size_t limit = marls::kDefaultExhaustiveLimit;
    check_cmd->add_option("--oracle", oracle_file)->required();
    check_cmd->add_option("--limit", limit);

    // simulate ----------------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo return of a policy");
    int sim_episodes = 1000;
    std::uint64_t sim_seed = 0;
    sim_cmd->add_option("--instance", instance_file)->required();
    sim_cmd->add_option("--policy", policy_file)->required();
    sim_cmd->add_option("--episodes", sim_episodes)->required();
    sim_cmd->add_option("--seed", sim_seed)->required();

    // bench -------------------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "Time plan and learn on generated instances");
    int bench_max_agents = 4, bench_episodes = 50;
    bench_cmd->add_option("--max-agents", bench_max_agents);
    bench_cmd->add_option("--episodes", bench_episodes);

    // run ---------------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
    run_cmd->add_option("--config", config_file)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            json spec = marls::generator_to_json(g);
            spec["kind"] = gen_kind;
            spec["oracle"] = gen_oracle;
            const auto instance = marls::generate_instance(marls::generator_from_json(spec));
            marls::io::write_json(gen_out, marls::io::instance_to_json(instance));
        } else if (*plan_cmd) {
            const auto spec = marls::io::load_instance(instance_file);
            pc.sample_override = plan_samples;
            const auto res = marls::plan(spec, pc);
            for (const auto& w : res.diagnostics.warnings) std::cerr << "warning: " << w << '\n';
            marls::io::write_json(out_path, marls::io::policy_to_json(res.policy));
            print({{"N_formula", res.diagnostics.theoretical_samples_raw},
                   {"N", res.diagnostics.theoretical_samples},
                   {"N_used", res.diagnostics.samples_used},
                   {"wall_seconds", res.diagnostics.wall_seconds},
                   {"policy", out_path}});
        } else if (*learn_cmd) {
            const auto spec = marls::io::load_instance(instance_file);
            lc.fallback = marls::io::parse_fallback(fallback);
            lc.sample_override = learn_samples;
            lc.keep_policies = false;
            const auto res = marls::learn(spec, lc);
            for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
            std::filesystem::create_directories(out_path);
            std::ofstream csv(std::filesystem::path(out_path) / "regret.csv", std::ios::binary);
            res.log.write_csv(csv);
            const auto model = marls::empirical_model(res.counts);
            marls::Rng rng = marls::Rng(lc.seed).split("final-policy");
            const auto final_policy =
                marls::compute_policy_for_episode(spec, res.counts, model, lc, res.samples_used, res.iota, rng);
            marls::io::write_json(std::filesystem::path(out_path) / "final_policy.json",
                                  marls::io::policy_to_json(final_policy.policy));
            json summary = {{"v_star", res.v_star},
                            {"cumulative_half_regret", res.log.cumulative()},
                            {"iota", res.iota},
                            {"N_formula", res.theoretical_samples_raw},
                            {"N_used", res.samples_used}};
            if (lc.track_optimism) {
                std::size_t ok = 0;
                for (const auto& r : res.optimism) ok += r.model_value >= r.true_value ? 1 : 0;
                summary["optimism_fraction"] = static_cast<double>(ok) / static_cast<double>(res.optimism.size());
            }
            print(summary);
        } else if (*exact_cmd) {
            const auto spec = marls::io::load_instance(instance_file);
            if (policy_file.empty()) {
                print({{"v_star", marls::joint_value_iteration(spec).value}});
            } else {
                print({{"policy_value", marls::evaluate_decomposable_policy(spec, marls::io::load_policy(policy_file))}});
            }
        } else if (*check_cmd) {
            const auto oracle = marls::io::load_oracle(oracle_file);
            const auto ground = marls::io::declared_pairs(*oracle);
            const auto report = marls::check_monotone_submodular(*oracle, ground, limit);
            print(report_json(report));
            return report.passed ? 0 : 3;
        } else if (*sim_cmd) {
            const auto spec = marls::io::load_instance(instance_file);
            const auto policy = marls::io::load_policy(policy_file);
            marls::Rng rng(sim_seed);
            double sum = 0.0, sum_sq = 0.0;
            for (int e = 0; e < sim_episodes; ++e) {
                const double r = marls::run_episode(spec, policy, rng).total_return;
                sum += r;
                sum_sq += r * r;
            }
            const double n = sim_episodes;
            const double mean = sum / n;
            const double var = n > 1 ? (sum_sq - n * mean * mean) / (n - 1) : 0.0;
            print({{"episodes", sim_episodes}, {"mean_return", mean}, {"std_error", std::sqrt(std::max(0.0, var) / n)}});
        } else if (*bench_cmd) {
            for (int k = 1; k <= bench_max_agents; ++k) {
                marls::GeneratorSpec bg;
                bg.num_agents = k;
                bg.num_states = 3;
                bg.num_actions = 2;
                bg.horizon = 3;
                bg.seed = 7;
                const auto spec = marls::generate_instance(bg);
                marls::PlannerConfig bpc;
                const auto planned = marls::plan(spec, bpc);
                marls::LearnerConfig blc;
                blc.episodes = bench_episodes;
                blc.sample_cap = 20'000;
                blc.keep_policies = false;
                const auto t0 = std::chrono::steady_clock::now();
                marls::learn(spec, blc);
                const double learn_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                std::cout << json{{"agents", k},
                                  {"plan_seconds", planned.diagnostics.wall_seconds},
                                  {"plan_samples", planned.diagnostics.samples_used},
                                  {"learn_episodes", bench_episodes},
                                  {"learn_seconds", learn_s}}
                                 .dump()
                          << '\n';
            }
        } else if (!config_file.empty()) {
            const auto config = marls::experiment_from_json(marls::io::read_json(config_file));
            print(marls::run_experiment(config));
        } else {
            std::cout << app.help();
            return 1;
        }
    } catch (const marls::BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
