#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "marls/exact.hpp"
#include "marls/mamdp.hpp"

namespace marls {

struct PlannerConfig {
    double epsilon = 0.1;
    double delta = 0.05;
    std::optional<std::size_t> sample_override;
    /// Upper bound on the number of sampled trajectories per agent.
    std::size_t sample_cap = 2'000'000;
    /// Use exact marginal rewards instead of sampled estimates.
    bool use_exact_marginals = false;
    std::uint64_t seed = 0;
    double exact_budget = kDefaultExactBudget;
};

struct PlannerDiagnostics {
    std::vector<ValueTables> tables;  // per agent: V̂ and Q̂
    double theoretical_samples_raw = 0.0;
    std::size_t theoretical_samples = 0;
    std::size_t samples_used = 0;
    bool capped = false;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
};

struct PlanResult {
    DecomposablePolicy policy;
    PlannerDiagnostics diagnostics;
};

/// (1 / 2ε²) · ln(2KSAH / δ) before rounding.
double sample_count_raw(double epsilon, double delta, int K, int S, int A, int H);

/// Trajectories per agent for the known-dynamics planner: ceil of
/// sample_count_raw, at least 1.
std::size_t sample_count(double epsilon, double delta, int K, int S, int A, int H);

/**
 * Average marginal gain of (state, action) over the prefix agents' pairs at
 * step h, pairing the l-th trajectory of every prefix agent.
 *
 * Samples with identical prefix pair sets are grouped and weighted by their
 * frequency, which is the same average computed with one oracle call per
 * distinct set. A deterministic prefix therefore reproduces the exact marginal
 * gain bit for bit.
 */
double estimate_marginal_reward(std::span<const TrajectoryBank> prefix, const SetFunctionOracle& oracle, int h,
                                GroundPair x);

/// All S × A estimates at step h, as a row-major [s][a] table.
std::vector<double> estimate_marginal_rewards(std::span<const TrajectoryBank> prefix,
                                              const SetFunctionOracle& oracle, int h, int num_states,
                                              int num_actions);

/// Greedy sequential policy optimization for known dynamics.
PlanResult plan(const MamdpSpec& spec, const PlannerConfig& config);

}  // namespace marls
