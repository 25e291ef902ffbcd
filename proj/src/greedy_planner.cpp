#include "marls/greedy_planner.hpp"

#include <chrono>
#include <cmath>
#include <map>

namespace marls {

namespace {

struct PrefixGroup {
    PairSet base;
    double weight;
    double f_base;
};

/// Distinct prefix pair sets at step h with their empirical frequencies.
std::vector<PrefixGroup> group_prefix(std::span<const TrajectoryBank> prefix, const SetFunctionOracle& oracle, int h) {
    if (prefix.empty()) throw InvalidArgument("estimate_marginal_reward: need at least one prefix agent");
    const std::size_t n = prefix[0].samples();
    if (n == 0) throw InvalidArgument("estimate_marginal_reward: need at least one sample");
    for (const auto& bank : prefix) {
        if (bank.samples() != n) throw InvalidArgument("estimate_marginal_reward: prefix banks differ in sample count");
        if (h < 0 || h >= bank.horizon()) throw InvalidArgument("estimate_marginal_reward: step out of range");
    }
    std::map<PairSet, std::size_t> counts;
    std::vector<GroundPair> pairs(prefix.size());
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t j = 0; j < prefix.size(); ++j) pairs[j] = prefix[j].at(l, h);
        ++counts[PairSet(pairs)];
    }
    std::vector<PrefixGroup> groups;
    groups.reserve(counts.size());
    for (auto& [set, c] : counts) {
        const double f_base = oracle.eval(set);
        groups.push_back({set, static_cast<double>(c) / static_cast<double>(n), f_base});
    }
    return groups;
}

double grouped_gain(const std::vector<PrefixGroup>& groups, const SetFunctionOracle& oracle, GroundPair x) {
    double total = 0.0;
    for (const auto& g : groups) {
        if (!g.base.contains(x)) total += g.weight * (oracle.eval(g.base.with(x)) - g.f_base);
    }
    return total;
}

}  // namespace

double sample_count_raw(double epsilon, double delta, int K, int S, int A, int H) {
    if (!(epsilon > 0.0)) throw InvalidArgument("sample_count: epsilon must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("sample_count: delta must lie in (0, 1)");
    if (K < 1 || S < 1 || A < 1 || H < 1) throw InvalidArgument("sample_count: sizes must be >= 1");
    return std::log(2.0 * K * S * A * H / delta) / (2.0 * epsilon * epsilon);
}

std::size_t sample_count(double epsilon, double delta, int K, int S, int A, int H) {
    const double raw = sample_count_raw(epsilon, delta, K, S, A, H);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw)));
}

double estimate_marginal_reward(std::span<const TrajectoryBank> prefix, const SetFunctionOracle& oracle, int h,
                                GroundPair x) {
    return grouped_gain(group_prefix(prefix, oracle, h), oracle, x);
}

std::vector<double> estimate_marginal_rewards(std::span<const TrajectoryBank> prefix,
                                              const SetFunctionOracle& oracle, int h, int num_states,
                                              int num_actions) {
    const auto groups = group_prefix(prefix, oracle, h);
    std::vector<double> out(static_cast<std::size_t>(num_states) * num_actions);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a)
            out[static_cast<std::size_t>(s) * num_actions + a] = grouped_gain(groups, oracle, {s, a});
    return out;
}

PlanResult plan(const MamdpSpec& spec, const PlannerConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const int K = spec.num_agents();
    const int S = spec.num_states();
    const int A = spec.num_actions();
    const int H = spec.horizon();

    PlanResult result;
    auto& diag = result.diagnostics;
    diag.theoretical_samples_raw = sample_count_raw(config.epsilon, config.delta, K, S, A, H);
    diag.theoretical_samples = sample_count(config.epsilon, config.delta, K, S, A, H);
    std::size_t n = config.sample_override.value_or(diag.theoretical_samples);
    if (n == 0) throw InvalidArgument("plan: sample count must be >= 1");
    if (n > config.sample_cap) {
        diag.capped = true;
        diag.warnings.push_back("sample count " + std::to_string(n) + " exceeds cap; using " +
                                std::to_string(config.sample_cap));
        n = config.sample_cap;
    }
    diag.samples_used = config.use_exact_marginals ? 0 : n;

    const Rng sampling_root = Rng(config.seed).split("planner-trajectories");
    std::vector<AgentPolicy> policies;
    std::vector<TrajectoryBank> banks;

    for (int i = 0; i < K; ++i) {
        std::vector<double> r;
        if (config.use_exact_marginals) {
            r = exact_marginal_rewards(spec, policies, i, config.exact_budget);
        } else {
            r.assign(static_cast<std::size_t>(H) * S * A, 0.0);
            for (int h = 0; h < H; ++h) {
                std::vector<double> row;
                if (i == 0) {
                    row.resize(static_cast<std::size_t>(S) * A);
                    for (int s = 0; s < S; ++s)
                        for (int a = 0; a < A; ++a) row[static_cast<std::size_t>(s) * A + a] = spec.oracle().eval(PairSet{{s, a}});
                } else {
                    row = estimate_marginal_rewards(banks, spec.oracle(), h, S, A);
                }
                std::copy(row.begin(), row.end(), r.begin() + static_cast<std::ptrdiff_t>(h) * S * A);
            }
        }

        const auto& p = spec.dynamics(i);
        ValueTables t(H, S, A);
        AgentPolicy pi(H, S);
        for (int h = H - 1; h >= 0; --h) {
            for (int s = 0; s < S; ++s) {
                for (int a = 0; a < A; ++a) {
                    double q = r[(static_cast<std::size_t>(h) * S + s) * A + a];
                    const auto row = p.row(h, s, a);
                    for (int sp = 0; sp < S; ++sp) q += row[sp] * t.V(h + 1, sp);
                    t.Q(h, s, a) = q;
                }
                const int best = static_cast<int>(argmax_first(t.Q_row(h, s)));
                pi.set(h, s, best);
                t.V(h, s) = t.Q(h, s, best);
            }
        }
        diag.tables.push_back(std::move(t));
        policies.push_back(pi);

        // The last agent's trajectories would never be read.
        if (!config.use_exact_marginals && i + 1 < K) {
            Rng rng = sampling_root.split(static_cast<std::uint64_t>(i));
            banks.push_back(sample_trajectory_bank(p, pi, spec.initial_state()[i], n, rng));
        }
    }

    result.policy = DecomposablePolicy(std::move(policies));
    diag.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace marls
