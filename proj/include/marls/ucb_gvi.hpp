#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "marls/exact.hpp"
#include "marls/mamdp.hpp"

namespace marls {

enum class EvaluationMode { Exact, MonteCarlo };

struct LearnerConfig {
    int episodes = 100;
    double delta = 0.1;
    double epsilon = 0.1;
    double bonus_scale = 1.0;
    UnvisitedFallback fallback = UnvisitedFallback::SelfLoop;
    std::uint64_t seed = 0;
    EvaluationMode evaluation = EvaluationMode::Exact;
    std::size_t monte_carlo_episodes = 1000;
    std::optional<std::size_t> sample_override;
    /// Upper bound on synthetic trajectories per agent per episode.
    std::size_t sample_cap = 200'000;
    /// Record the bonus-augmented model value of each executed policy.
    bool track_optimism = false;
    bool keep_policies = true;
    double exact_budget = kDefaultExactBudget;
};

/// ln(6 S² A T H K / δ).
double iota(int S, int A, int T, int H, int K, double delta);

/// bonus_scale · (H·sqrt(2Sι/N) + 3HSι/N); N must be >= 1.
double bonus(double visits, int H, int S, double iota_value, double bonus_scale = 1.0);

/// (K²H² / 2ε²) · ln(6KSAH / δ) before rounding.
double learner_sample_count_raw(double epsilon, double delta, int K, int S, int A, int H);
std::size_t learner_sample_count(double epsilon, double delta, int K, int S, int A, int H);

/// Visit counts N_{i,h}(s, a) and transition counts N_{i,h}(s, a, s').
class Counts {
public:
    Counts() = default;
    Counts(int agents, int horizon, int states, int actions);

    int num_agents() const noexcept { return visit_.num_agents(); }
    int horizon() const noexcept { return visit_.horizon(); }
    int num_states() const noexcept { return visit_.num_states(); }
    int num_actions() const noexcept { return visit_.num_actions(); }

    void update(int agent, int h, int s, int a, int next_state);

    std::int64_t visits(int agent, int h, int s, int a) const { return visit_(agent, h, s, a); }
    std::int64_t transits(int agent, int h, int s, int a, int next_state) const;

    /// Σ_{s'} transit = visit everywhere and Σ_{s,a} visit[i][h] = episodes for every (i, h).
    bool consistent(std::int64_t episodes) const;

private:
    PairTable<std::int64_t> visit_;
    std::vector<std::int64_t> transit_;  // [i][h][s][a][s']
};

/// P̂ = transit / visit where visit > 0; other rows are left undefined.
std::vector<AgentTransitions> empirical_model(const Counts& counts);

/// b(N_{i,h}(s, a)) for visited cells and H for unvisited ones.
BonusTable bonus_table(const Counts& counts, double iota_value, double bonus_scale);

struct EpisodePolicy {
    DecomposablePolicy policy;
    std::vector<ValueTables> tables;  // per agent: Q̂ (uncapped) and V̂ (capped at H)
};

/**
 * One round of optimistic greedy value iteration. Agents are processed in
 * index order; agent i's marginal rewards are estimated from `samples`
 * synthetic trajectories of agents 0..i-1 drawn under `model` (undefined rows
 * resolved with config.fallback). Unvisited cells get Q̂ = H.
 */
EpisodePolicy compute_policy_for_episode(const MamdpSpec& spec, const Counts& counts,
                                         std::span<const AgentTransitions> model, const LearnerConfig& config,
                                         std::size_t samples, double iota_value, Rng& rng);

struct RegretEntry {
    int episode = 0;
    double value_exec = 0.0;
    double half_vstar = 0.0;
    double increment = 0.0;  // signed, never clipped
    double cumulative = 0.0;
};

class RegretLog {
public:
    void append(double value_exec, double half_vstar);

    const std::vector<RegretEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    double cumulative() const noexcept { return entries_.empty() ? 0.0 : entries_.back().cumulative; }
    /// Cumulative regret after `episode` episodes (1-based).
    double cumulative_at(std::size_t episode) const;
    /// Mean increment over episodes first..last inclusive (1-based).
    double mean_increment(std::size_t first, std::size_t last) const;

    /// episode,value_exec,half_vstar,increment,cumulative
    void write_csv(std::ostream& out) const;

private:
    std::vector<RegretEntry> entries_;
};

struct OptimismRecord {
    double model_value = 0.0;  // V̄ under P̂ with bonuses
    double true_value = 0.0;
};

struct LearnResult {
    std::vector<DecomposablePolicy> policies;
    RegretLog log;
    Counts counts;
    double v_star = 0.0;
    double iota = 0.0;
    double theoretical_samples_raw = 0.0;
    std::size_t samples_used = 0;
    std::vector<OptimismRecord> optimism;
    std::vector<std::string> warnings;
};

/// Runs UCB-GVI for config.episodes episodes against the true dynamics of `spec`.
LearnResult learn(const MamdpSpec& spec, const LearnerConfig& config);

}  // namespace marls
