#include "marls/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>

#include "marls/exact.hpp"
#include "marls/greedy_planner.hpp"
#include "marls/submodular.hpp"
#include "marls/ucb_gvi.hpp"

namespace marls {

namespace {

using io::json;

std::string kind_name(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::RandomDirichlet: return "random-dirichlet";
        case GeneratorKind::DeterministicChain: return "deterministic-chain";
        case GeneratorKind::DroneGrid: return "drone-grid";
    }
    return "";
}

GeneratorKind parse_kind(const std::string& s) {
    if (s == "random-dirichlet") return GeneratorKind::RandomDirichlet;
    if (s == "deterministic-chain") return GeneratorKind::DeterministicChain;
    if (s == "drone-grid") return GeneratorKind::DroneGrid;
    throw InvalidArgument("unknown generator kind '" + s + "'");
}

std::string oracle_name(OracleKind k) {
    switch (k) {
        case OracleKind::Coverage: return "coverage";
        case OracleKind::FacilityLocation: return "facility_location";
        case OracleKind::Modular: return "modular";
    }
    return "";
}

OracleKind parse_oracle(const std::string& s) {
    if (s == "coverage") return OracleKind::Coverage;
    if (s == "facility_location" || s == "facility-location") return OracleKind::FacilityLocation;
    if (s == "modular") return OracleKind::Modular;
    throw InvalidArgument("unknown oracle kind '" + s + "'");
}

OraclePtr random_oracle(const GeneratorSpec& g, Rng& rng) {
    const int S = g.num_states;
    const int A = g.num_actions;
    switch (g.oracle) {
        case OracleKind::Coverage: {
            std::vector<CoverageFunction::Entry> covers;
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    CoverageFunction::Entry e{{s, a}, {}};
                    for (int o = 0; o < g.num_objects; ++o)
                        if (rng.uniform() < g.coverage_density) e.objects.push_back(o);
                    covers.push_back(std::move(e));
                }
            return std::make_shared<CoverageFunction>(g.num_objects, std::move(covers));
        }
        case OracleKind::FacilityLocation: {
            std::vector<GroundPair> pairs;
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) pairs.push_back({s, a});
            std::vector<std::vector<double>> w(static_cast<std::size_t>(g.num_objects), std::vector<double>(pairs.size()));
            for (auto& row : w)
                for (auto& x : row) x = rng.uniform();
            return std::make_shared<FacilityLocationFunction>(std::move(pairs), std::move(w));
        }
        case OracleKind::Modular: {
            std::map<GroundPair, double> values;
            std::vector<double> raw;
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    const double v = rng.uniform();
                    values[{s, a}] = v;
                    raw.push_back(v);
                }
            std::sort(raw.rbegin(), raw.rend());
            double top = 0.0;
            for (std::size_t k = 0; k < raw.size() && k < static_cast<std::size_t>(g.num_agents); ++k) top += raw[k];
            if (top > 0.0)
                for (auto& [x, v] : values) v /= top;
            return std::make_shared<ModularFunction>(std::move(values));
        }
    }
    throw InvalidArgument("unknown oracle kind");
}

MamdpSpec generate_drone_grid(const GeneratorSpec& g) {
    if (g.grid_width < 1 || g.grid_height < 1) throw InvalidArgument("drone-grid: grid dimensions must be >= 1");
    if (g.num_objects < 1) throw InvalidArgument("drone-grid: num_objects must be >= 1");
    if (g.radius < 0.0) throw InvalidArgument("drone-grid: radius must be >= 0");
    const int W = g.grid_width;
    const int S = W * g.grid_height;
    constexpr int A = 5;
    Rng rng = Rng(g.seed).split("drone-grid");

    std::vector<double> probs(static_cast<std::size_t>(g.horizon) * S * A * S, 0.0);
    for (int h = 0; h < g.horizon; ++h)
        for (int s = 0; s < S; ++s) {
            const int x = s % W;
            const int y = s / W;
            const int moves[A][2] = {{x, y}, {std::max(0, x - 1), y}, {std::min(W - 1, x + 1), y},
                                     {x, std::max(0, y - 1)}, {x, std::min(g.grid_height - 1, y + 1)}};
            for (int a = 0; a < A; ++a) {
                const int next = moves[a][1] * W + moves[a][0];
                probs[((static_cast<std::size_t>(h) * S + s) * A + a) * S + next] = 1.0;
            }
        }

    std::vector<int> object_cell(static_cast<std::size_t>(g.num_objects));
    for (auto& c : object_cell) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(S)));
    std::vector<CoverageFunction::Entry> covers;
    for (int s = 0; s < S; ++s) {
        std::vector<int> objs;
        for (int o = 0; o < g.num_objects; ++o) {
            const double dx = (s % W) - (object_cell[o] % W);
            const double dy = (s / W) - (object_cell[o] / W);
            if (std::sqrt(dx * dx + dy * dy) <= g.radius + 1e-12) objs.push_back(o);
        }
        if (objs.empty()) continue;
        for (int a = 0; a < A; ++a) covers.push_back({{s, a}, objs});
    }

    std::vector<AgentTransitions> dynamics(static_cast<std::size_t>(g.num_agents), AgentTransitions(g.horizon, S, A, probs));
    std::vector<int> init(static_cast<std::size_t>(g.num_agents));
    for (auto& s : init) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(S)));
    return MamdpSpec(S, A, g.horizon, std::move(dynamics), std::move(init),
                     std::make_shared<CoverageFunction>(g.num_objects, std::move(covers)));
}

// ---------------------------------------------------------------------------

template <typename T>
T param(const json& params, const char* key, T fallback) {
    return params.contains(key) ? params.at(key).get<T>() : fallback;
}

PlannerConfig planner_config(const json& p, std::uint64_t seed) {
    PlannerConfig c;
    c.epsilon = param(p, "epsilon", c.epsilon);
    c.delta = param(p, "delta", c.delta);
    c.use_exact_marginals = param(p, "exact_marginals", c.use_exact_marginals);
    if (p.contains("samples")) c.sample_override = p.at("samples").get<std::size_t>();
    c.sample_cap = param(p, "sample_cap", c.sample_cap);
    c.seed = seed;
    return c;
}

LearnerConfig learner_config(const json& p, std::uint64_t seed) {
    LearnerConfig c;
    c.episodes = param(p, "episodes", c.episodes);
    c.epsilon = param(p, "epsilon", c.epsilon);
    c.delta = param(p, "delta", c.delta);
    c.bonus_scale = param(p, "bonus_scale", c.bonus_scale);
    c.fallback = io::parse_fallback(param<std::string>(p, "fallback", "self-loop"));
    if (p.contains("samples")) c.sample_override = p.at("samples").get<std::size_t>();
    c.sample_cap = param(p, "sample_cap", c.sample_cap);
    const auto mode = param<std::string>(p, "evaluation", "exact");
    if (mode == "exact") {
        c.evaluation = EvaluationMode::Exact;
    } else if (mode == "monte-carlo") {
        c.evaluation = EvaluationMode::MonteCarlo;
    } else {
        throw InvalidArgument("unknown evaluation mode '" + mode + "'");
    }
    c.monte_carlo_episodes = param(p, "mc_episodes", c.monte_carlo_episodes);
    c.track_optimism = param(p, "track_optimism", c.track_optimism);
    c.keep_policies = false;
    c.seed = seed;
    return c;
}

std::vector<GroundPair> check_ground(const MamdpSpec& spec, std::size_t limit, std::uint64_t seed) {
    std::vector<GroundPair> all;
    for (int s = 0; s < spec.num_states(); ++s)
        for (int a = 0; a < spec.num_actions(); ++a) all.push_back({s, a});
    if (all.size() <= limit) return all;
    // Seeded partial Fisher-Yates: a reproducible subset of `limit` pairs.
    Rng rng = Rng(seed).split("check-ground");
    for (std::size_t k = 0; k < limit; ++k) {
        const auto j = k + static_cast<std::size_t>(rng.below(all.size() - k));
        std::swap(all[k], all[j]);
    }
    all.resize(limit);
    std::sort(all.begin(), all.end());
    return all;
}

json pairs_json(const PairSet& set) {
    json out = json::array();
    for (const auto& x : set) out.push_back({x.state, x.action});
    return out;
}

json seed_run(const ExperimentConfig& config, const MamdpSpec& spec, std::uint64_t seed,
              const std::optional<double>& v_star) {
    const auto dir = config.output_dir / ("seed_" + std::to_string(seed));
    std::filesystem::create_directories(dir);
    json summary = {{"seed", seed}, {"dir", dir.filename().string()}};
    const auto& p = config.params;

    if (config.algorithm == "plan") {
        const auto cfg = planner_config(p, seed);
        const auto res = plan(spec, cfg);
        const double value = evaluate_decomposable_policy(spec, res.policy);
        io::write_json(dir / "policy.json", io::policy_to_json(res.policy));
        summary["value"] = value;
        summary["samples_used"] = res.diagnostics.samples_used;
        summary["warnings"] = res.diagnostics.warnings;
        if (v_star) {
            summary["v_star"] = *v_star;
            summary["ratio"] = *v_star > 0.0 ? value / *v_star : 1.0;
            summary["approximation_floor"] =
                0.5 * *v_star - cfg.epsilon * spec.num_agents() * spec.horizon();
        }
    } else if (config.algorithm == "learn") {
        const auto cfg = learner_config(p, seed);
        const auto res = learn(spec, cfg);
        std::ofstream csv(dir / "regret.csv", std::ios::binary);
        res.log.write_csv(csv);
        // final policy: the greedy policy for the counts gathered over all episodes
        const auto model = empirical_model(res.counts);
        Rng rng = Rng(seed).split("final-policy");
        const auto final_policy = compute_policy_for_episode(spec, res.counts, model, cfg, res.samples_used, res.iota, rng);
        io::write_json(dir / "final_policy.json", io::policy_to_json(final_policy.policy));
        summary["v_star"] = res.v_star;
        summary["cumulative_half_regret"] = res.log.cumulative();
        summary["samples_used"] = res.samples_used;
        summary["iota"] = res.iota;
        summary["warnings"] = res.warnings;
        if (cfg.track_optimism) {
            std::size_t ok = 0;
            for (const auto& r : res.optimism) ok += r.model_value >= r.true_value ? 1 : 0;
            summary["optimism_fraction"] = res.optimism.empty() ? 1.0 : static_cast<double>(ok) / res.optimism.size();
        }
    } else if (config.algorithm == "exact") {
        const auto sol = joint_value_iteration(spec);
        json result = {{"v_star", sol.value}};
        if (p.contains("policy")) {
            const auto policy = io::load_policy(p.at("policy").get<std::string>());
            result["policy_value"] = evaluate_decomposable_policy(spec, policy);
        }
        io::write_json(dir / "result.json", result);
        summary.update(result);
    } else if (config.algorithm == "check") {
        const auto limit = param<std::size_t>(p, "limit", 12);
        const auto ground = check_ground(spec, limit, seed);
        const auto report = check_monotone_submodular(spec.oracle(), ground, std::max(limit, kDefaultExhaustiveLimit));
        json ground_json = json::array();
        for (const auto& x : ground) ground_json.push_back({x.state, x.action});
        json result = {{"passed", report.passed}, {"checks", report.checks}, {"ground", ground_json},
                       {"max_gain_gap", report.max_gain_gap}};
        if (report.witness) {
            const auto& w = *report.witness;
            result["witness"] = {
                {"kind", w.kind == SubmodularityViolation::Kind::NotMonotone ? "not_monotone" : "not_submodular"},
                {"A", pairs_json(w.smaller)},
                {"B", pairs_json(w.larger)},
                {"x", w.added ? json{w.added->state, w.added->action} : json(nullptr)},
                {"values", {w.smaller_value, w.larger_value}}};
        }
        io::write_json(dir / "report.json", result);
        summary.update(result);
    }
    return summary;
}

}  // namespace

// ---------------------------------------------------------------------------

MamdpSpec generate_instance(const GeneratorSpec& g) {
    if (g.num_agents < 1 || g.horizon < 1) throw InvalidArgument("generate_instance: K and H must be >= 1");
    if (g.kind == GeneratorKind::DroneGrid) return generate_drone_grid(g);
    if (g.num_states < 1 || g.num_actions < 1) throw InvalidArgument("generate_instance: S and A must be >= 1");
    if (g.num_objects < 1) throw InvalidArgument("generate_instance: num_objects must be >= 1");
    const int S = g.num_states;
    const int A = g.num_actions;
    Rng root(g.seed);
    Rng trng = root.split("transitions");
    Rng orng = root.split("oracle");
    Rng irng = root.split("initial");

    std::vector<AgentTransitions> dynamics;
    for (int i = 0; i < g.num_agents; ++i) {
        std::vector<double> probs(static_cast<std::size_t>(g.horizon) * S * A * S, 0.0);
        for (std::size_t row = 0; row < probs.size() / S; ++row) {
            auto* r = probs.data() + row * S;
            if (g.kind == GeneratorKind::DeterministicChain) {
                r[trng.below(static_cast<std::uint64_t>(S))] = 1.0;
            } else {
                double sum = 0.0;
                for (int k = 0; k < S; ++k) sum += (r[k] = -std::log(1.0 - trng.uniform()));
                for (int k = 0; k < S; ++k) r[k] /= sum;
            }
        }
        dynamics.emplace_back(g.horizon, S, A, std::move(probs));
    }
    std::vector<int> init(static_cast<std::size_t>(g.num_agents));
    for (auto& s : init) s = static_cast<int>(irng.below(static_cast<std::uint64_t>(S)));
    return MamdpSpec(S, A, g.horizon, std::move(dynamics), std::move(init), random_oracle(g, orng));
}

GeneratorSpec generator_from_json(const io::json& j) {
    GeneratorSpec g;
    g.kind = parse_kind(j.value("kind", kind_name(g.kind)));
    g.num_states = j.value("num_states", g.num_states);
    g.num_actions = j.value("num_actions", g.num_actions);
    g.num_agents = j.value("num_agents", g.num_agents);
    g.horizon = j.value("horizon", g.horizon);
    g.oracle = parse_oracle(j.value("oracle", oracle_name(g.oracle)));
    g.num_objects = j.value("num_objects", g.num_objects);
    g.coverage_density = j.value("coverage_density", g.coverage_density);
    g.grid_width = j.value("grid_width", g.grid_width);
    g.grid_height = j.value("grid_height", g.grid_height);
    g.radius = j.value("radius", g.radius);
    g.seed = j.value("seed", g.seed);
    return g;
}

io::json generator_to_json(const GeneratorSpec& g) {
    return {{"kind", kind_name(g.kind)},         {"num_states", g.num_states},
            {"num_actions", g.num_actions},      {"num_agents", g.num_agents},
            {"horizon", g.horizon},              {"oracle", oracle_name(g.oracle)},
            {"num_objects", g.num_objects},      {"coverage_density", g.coverage_density},
            {"grid_width", g.grid_width},        {"grid_height", g.grid_height},
            {"radius", g.radius},                {"seed", g.seed}};
}

ExperimentConfig experiment_from_json(const io::json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("instance")) c.instance_file = j.at("instance").get<std::string>();
        if (j.contains("generator")) c.generator = generator_from_json(j.at("generator"));
        c.algorithm = j.at("algorithm").get<std::string>();
        if (j.contains("params")) c.params = j.at("params");
        c.seeds = j.value("seeds", std::vector<std::uint64_t>{});
        c.output_dir = j.contains("output_dir") ? std::filesystem::path(j.at("output_dir").get<std::string>())
                                                : default_output_root() / c.algorithm;
    } catch (const io::json::exception& e) {
        throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
    }
    if (c.instance_file.has_value() == c.generator.has_value())
        throw InvalidArgument("experiment config needs exactly one of \"instance\" and \"generator\"");
    if (c.seeds.empty()) throw InvalidArgument("experiment config needs a nonempty \"seeds\" list");
    if (c.algorithm != "plan" && c.algorithm != "learn" && c.algorithm != "exact" && c.algorithm != "check")
        throw InvalidArgument("unknown algorithm '" + c.algorithm + "' (expected plan|learn|exact|check)");
    return c;
}

std::filesystem::path default_output_root() {
    const char* env = std::getenv("MARLS_OUTPUT_ROOT");
    return (env != nullptr && *env != '\0') ? std::filesystem::path(env) : std::filesystem::path("results");
}

io::json run_experiment(const ExperimentConfig& config) {
    const MamdpSpec spec = config.instance_file ? io::load_instance(*config.instance_file) : generate_instance(*config.generator);
    std::filesystem::create_directories(config.output_dir);
    const int K = spec.num_agents(), S = spec.num_states(), A = spec.num_actions(), H = spec.horizon();

    json resolved = {{"algorithm", config.algorithm}, {"params", config.params}, {"seeds", config.seeds},
                     {"output_dir", config.output_dir.string()}};
    if (config.instance_file) resolved["instance"] = config.instance_file->string();
    if (config.generator) resolved["generator"] = generator_to_json(*config.generator);

    json derived = json::object();
    std::optional<double> v_star;
    if (config.algorithm == "plan") {
        const auto cfg = planner_config(config.params, 0);
        derived["N_formula"] = sample_count_raw(cfg.epsilon, cfg.delta, K, S, A, H);
        derived["N"] = sample_count(cfg.epsilon, cfg.delta, K, S, A, H);
        const std::size_t n = cfg.sample_override.value_or(sample_count(cfg.epsilon, cfg.delta, K, S, A, H));
        derived["N_used"] = cfg.use_exact_marginals ? 0 : std::min(n, cfg.sample_cap);
        try {
            v_star = joint_value_iteration(spec).value;
        } catch (const BudgetExceeded&) {
            derived["v_star_note"] = "instance beyond exact budget; V* not computed";
        }
    } else if (config.algorithm == "learn") {
        const auto cfg = learner_config(config.params, 0);
        derived["iota"] = iota(S, A, cfg.episodes, H, K, cfg.delta);
        derived["N_formula"] = learner_sample_count_raw(cfg.epsilon, cfg.delta, K, S, A, H);
        derived["N"] = learner_sample_count(cfg.epsilon, cfg.delta, K, S, A, H);
        derived["N_used"] = std::min(cfg.sample_override.value_or(learner_sample_count(cfg.epsilon, cfg.delta, K, S, A, H)),
                                     cfg.sample_cap);
        // refuse regret mode up front when V* is out of reach
        joint_value_iteration(spec);
    }
    if (v_star) derived["v_star"] = *v_star;

    std::vector<std::future<json>> futures;
    for (auto seed : config.seeds)
        futures.push_back(std::async(std::launch::async, [&, seed] { return seed_run(config, spec, seed, v_star); }));
    json runs = json::array();
    for (auto& f : futures) runs.push_back(f.get());

    json manifest = {{"version", MARLS_VERSION},
                     {"config", resolved},
                     {"instance", {{"num_states", S}, {"num_actions", A}, {"num_agents", K}, {"horizon", H},
                                   {"oracle", spec.oracle().kind()}}},
                     {"derived", derived},
                     {"runs", runs}};
    io::write_json(config.output_dir / "manifest.json", manifest);
    return manifest;
}

}  // namespace marls
