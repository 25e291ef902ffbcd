#include "marls/ucb_gvi.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "marls/greedy_planner.hpp"

namespace marls {

double iota(int S, int A, int T, int H, int K, double delta) {
    if (S < 1 || A < 1 || T < 1 || H < 1 || K < 1) throw InvalidArgument("iota: sizes must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("iota: delta must lie in (0, 1)");
    return std::log(6.0 * S * S * A * static_cast<double>(T) * H * K / delta);
}

double bonus(double visits, int H, int S, double iota_value, double bonus_scale) {
    if (!(visits >= 1.0)) throw InvalidArgument("bonus: visit count must be >= 1");
    return bonus_scale * (H * std::sqrt(2.0 * S * iota_value / visits) + 3.0 * H * S * iota_value / visits);
}

double learner_sample_count_raw(double epsilon, double delta, int K, int S, int A, int H) {
    if (!(epsilon > 0.0)) throw InvalidArgument("learner_sample_count: epsilon must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("learner_sample_count: delta must lie in (0, 1)");
    if (K < 1 || S < 1 || A < 1 || H < 1) throw InvalidArgument("learner_sample_count: sizes must be >= 1");
    const double kh = static_cast<double>(K) * H;
    return kh * kh / (2.0 * epsilon * epsilon) * std::log(6.0 * K * S * A * H / delta);
}

std::size_t learner_sample_count(double epsilon, double delta, int K, int S, int A, int H) {
    const double raw = learner_sample_count_raw(epsilon, delta, K, S, A, H);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw)));
}

// ---------------------------------------------------------------------------

Counts::Counts(int agents, int horizon, int states, int actions)
    : visit_(agents, horizon, states, actions, 0),
      transit_(static_cast<std::size_t>(agents) * horizon * states * actions * states, 0) {}

void Counts::update(int agent, int h, int s, int a, int next_state) {
    if (agent < 0 || agent >= num_agents() || h < 0 || h >= horizon() || s < 0 || s >= num_states() || a < 0 ||
        a >= num_actions() || next_state < 0 || next_state >= num_states())
        throw InvalidArgument("Counts::update: index out of range");
    ++visit_(agent, h, s, a);
    const std::size_t cell = ((static_cast<std::size_t>(agent) * horizon() + h) * num_states() + s) * num_actions() + a;
    ++transit_[cell * num_states() + next_state];
}

std::int64_t Counts::transits(int agent, int h, int s, int a, int next_state) const {
    const std::size_t cell = ((static_cast<std::size_t>(agent) * horizon() + h) * num_states() + s) * num_actions() + a;
    return transit_[cell * num_states() + next_state];
}

bool Counts::consistent(std::int64_t episodes) const {
    for (int i = 0; i < num_agents(); ++i) {
        for (int h = 0; h < horizon(); ++h) {
            std::int64_t total = 0;
            for (int s = 0; s < num_states(); ++s) {
                for (int a = 0; a < num_actions(); ++a) {
                    std::int64_t row = 0;
                    for (int sp = 0; sp < num_states(); ++sp) row += transits(i, h, s, a, sp);
                    if (row != visits(i, h, s, a)) return false;
                    total += visits(i, h, s, a);
                }
            }
            if (total != episodes) return false;
        }
    }
    return true;
}

std::vector<AgentTransitions> empirical_model(const Counts& counts) {
    const int S = counts.num_states();
    std::vector<AgentTransitions> model;
    std::vector<double> row(static_cast<std::size_t>(S));
    for (int i = 0; i < counts.num_agents(); ++i) {
        AgentTransitions p(counts.horizon(), S, counts.num_actions());
        for (int h = 0; h < counts.horizon(); ++h)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < counts.num_actions(); ++a) {
                    const auto n = counts.visits(i, h, s, a);
                    if (n == 0) continue;
                    for (int sp = 0; sp < S; ++sp)
                        row[sp] = static_cast<double>(counts.transits(i, h, s, a, sp)) / static_cast<double>(n);
                    p.set_row_unchecked(h, s, a, row);
                }
        model.push_back(std::move(p));
    }
    return model;
}

BonusTable bonus_table(const Counts& counts, double iota_value, double bonus_scale) {
    const int H = counts.horizon();
    const int S = counts.num_states();
    BonusTable b(counts.num_agents(), H, S, counts.num_actions(), 0.0);
    for (int i = 0; i < counts.num_agents(); ++i)
        for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < counts.num_actions(); ++a) {
                    const auto n = counts.visits(i, h, s, a);
                    b(i, h, s, a) = n > 0 ? bonus(static_cast<double>(n), H, S, iota_value, bonus_scale)
                                          : static_cast<double>(H);
                }
    return b;
}

// ---------------------------------------------------------------------------

EpisodePolicy compute_policy_for_episode(const MamdpSpec& spec, const Counts& counts,
                                         std::span<const AgentTransitions> model, const LearnerConfig& config,
                                         std::size_t samples, double iota_value, Rng& rng) {
    const int K = spec.num_agents();
    const int S = spec.num_states();
    const int A = spec.num_actions();
    const int H = spec.horizon();
    if (counts.num_agents() != K || counts.horizon() != H || counts.num_states() != S || counts.num_actions() != A)
        throw InvalidArgument("compute_policy_for_episode: counts shape does not match instance");
    if (model.size() != static_cast<std::size_t>(K))
        throw InvalidArgument("compute_policy_for_episode: need one model per agent");
    if (samples == 0) throw InvalidArgument("compute_policy_for_episode: sample count must be >= 1");

    const double cap = static_cast<double>(H);
    const double slack = config.epsilon / (static_cast<double>(K) * H);
    const Rng root(rng.next_u64());

    EpisodePolicy out;
    std::vector<AgentPolicy> policies;
    std::vector<TrajectoryBank> banks;
    std::vector<double> singleton(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) singleton[static_cast<std::size_t>(s) * A + a] = spec.oracle().eval(PairSet{{s, a}});

    for (int i = 0; i < K; ++i) {
        const auto& p = model[i];
        ValueTables t(H, S, A);
        AgentPolicy pi(H, S);
        for (int h = H - 1; h >= 0; --h) {
            const std::vector<double> r =
                i == 0 ? singleton : estimate_marginal_rewards(banks, spec.oracle(), h, S, A);
            for (int s = 0; s < S; ++s) {
                for (int a = 0; a < A; ++a) {
                    const auto n = counts.visits(i, h, s, a);
                    if (n == 0) {
                        t.Q(h, s, a) = cap;
                        continue;
                    }
                    double q = r[static_cast<std::size_t>(s) * A + a];
                    const auto row = p.row(h, s, a);
                    for (int sp = 0; sp < S; ++sp) q += row[sp] * t.V(h + 1, sp);
                    q += bonus(static_cast<double>(n), H, S, iota_value, config.bonus_scale) + slack;
                    t.Q(h, s, a) = q;
                }
                const int best = static_cast<int>(argmax_first(t.Q_row(h, s)));
                pi.set(h, s, best);
                t.V(h, s) = std::min(cap, t.Q(h, s, best));
            }
        }
        if (i + 1 < K) {
            Rng stream = root.split(static_cast<std::uint64_t>(i));
            banks.push_back(sample_trajectory_bank(p, pi, spec.initial_state()[i], samples, stream, config.fallback));
        }
        out.tables.push_back(std::move(t));
        policies.push_back(std::move(pi));
    }
    out.policy = DecomposablePolicy(std::move(policies));
    return out;
}

// ---------------------------------------------------------------------------

void RegretLog::append(double value_exec, double half_vstar) {
    RegretEntry e;
    e.episode = static_cast<int>(entries_.size()) + 1;
    e.value_exec = value_exec;
    e.half_vstar = half_vstar;
    e.increment = half_vstar - value_exec;
    e.cumulative = cumulative() + e.increment;
    entries_.push_back(e);
}

double RegretLog::cumulative_at(std::size_t episode) const {
    if (episode == 0) return 0.0;
    if (episode > entries_.size()) throw InvalidArgument("RegretLog::cumulative_at: episode beyond log");
    return entries_[episode - 1].cumulative;
}

double RegretLog::mean_increment(std::size_t first, std::size_t last) const {
    if (first < 1 || last < first || last > entries_.size())
        throw InvalidArgument("RegretLog::mean_increment: bad episode range");
    double sum = 0.0;
    for (std::size_t k = first; k <= last; ++k) sum += entries_[k - 1].increment;
    return sum / static_cast<double>(last - first + 1);
}

void RegretLog::write_csv(std::ostream& out) const {
    out << "episode,value_exec,half_vstar,increment,cumulative\n";
    char buf[160];
    for (const auto& e : entries_) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", e.episode, e.value_exec, e.half_vstar,
                      e.increment, e.cumulative);
        out << buf;
    }
}

// ---------------------------------------------------------------------------

LearnResult learn(const MamdpSpec& spec, const LearnerConfig& config) {
    if (config.episodes < 1) throw InvalidArgument("learn: episodes must be >= 1");
    if (config.bonus_scale < 0.0) throw InvalidArgument("learn: bonus_scale must be >= 0");
    const int K = spec.num_agents();
    const int S = spec.num_states();
    const int A = spec.num_actions();
    const int H = spec.horizon();

    LearnResult result;
    result.v_star = joint_value_iteration(spec, config.exact_budget).value;
    result.iota = iota(S, A, config.episodes, H, K, config.delta);
    result.theoretical_samples_raw = learner_sample_count_raw(config.epsilon, config.delta, K, S, A, H);
    std::size_t n = config.sample_override.value_or(learner_sample_count(config.epsilon, config.delta, K, S, A, H));
    if (n == 0) throw InvalidArgument("learn: sample count must be >= 1");
    if (n > config.sample_cap) {
        result.warnings.push_back("synthetic sample count " + std::to_string(n) + " exceeds cap; using " +
                                  std::to_string(config.sample_cap));
        n = config.sample_cap;
    }
    result.samples_used = n;
    result.counts = Counts(K, H, S, A);

    const double half_vstar = 0.5 * result.v_star;
    const Rng root(config.seed);
    const Rng synthetic_root = root.split("synthetic");
    const Rng execute_root = root.split("execute");
    const Rng evaluate_root = root.split("evaluate");

    for (int k = 0; k < config.episodes; ++k) {
        const auto key = static_cast<std::uint64_t>(k);
        const auto model = empirical_model(result.counts);
        Rng synthetic = synthetic_root.split(key);
        auto ep_policy = compute_policy_for_episode(spec, result.counts, model, config, n, result.iota, synthetic);
        const auto& policy = ep_policy.policy;

        double value = 0.0;
        if (config.evaluation == EvaluationMode::Exact) {
            value = evaluate_decomposable_policy(spec, policy, config.exact_budget);
        } else {
            Rng eval = evaluate_root.split(key);
            double sum = 0.0;
            for (std::size_t e = 0; e < config.monte_carlo_episodes; ++e) sum += run_episode(spec, policy, eval).total_return;
            value = sum / static_cast<double>(std::max<std::size_t>(1, config.monte_carlo_episodes));
        }
        result.log.append(value, half_vstar);

        if (config.track_optimism) {
            std::vector<AgentTransitions> completed;
            for (const auto& p : model) completed.push_back(p.completed(config.fallback == UnvisitedFallback::None
                                                                            ? UnvisitedFallback::SelfLoop
                                                                            : config.fallback));
            const auto b = bonus_table(result.counts, result.iota, config.bonus_scale);
            const double model_value = evaluate_policy_under_model(completed, spec, policy, b, config.exact_budget);
            const double true_value = config.evaluation == EvaluationMode::Exact
                                          ? value
                                          : evaluate_decomposable_policy(spec, policy, config.exact_budget);
            result.optimism.push_back({model_value, true_value});
        }

        Rng execute = execute_root.split(key);
        const Episode ep = run_episode(spec, policy, execute);
        for (int i = 0; i < K; ++i) {
            const auto& tau = ep.agents[i];
            for (int h = 0; h < H; ++h) result.counts.update(i, h, tau.states[h], tau.actions[h], tau.next_state(h));
        }
        if (config.keep_policies) result.policies.push_back(std::move(ep_policy.policy));
    }
    return result;
}

}  // namespace marls
