#pragma once

#include <span>
#include <vector>

#include "marls/mamdp.hpp"

namespace marls {

/// Default cap on enumerated table cells for the exponential-cost oracles.
inline constexpr double kDefaultExactBudget = 1e7;

/// Per-agent, per-step state-action occupancy d[i][h](s, a).
using OccupancyMarginals = PairTable<double>;

/// Per-agent additive reward terms, e.g. exploration bonuses b[i][h](s, a).
using BonusTable = PairTable<double>;

/// Single-agent value tables over steps 0..H (V at step H is identically 0).
struct ValueTables {
    int horizon = 0, num_states = 0, num_actions = 0;
    std::vector<double> v;  // [(H+1) * S]
    std::vector<double> q;  // [H * S * A]

    ValueTables() = default;
    ValueTables(int horizon, int states, int actions)
        : horizon(horizon), num_states(states), num_actions(actions),
          v(static_cast<std::size_t>(horizon + 1) * states, 0.0),
          q(static_cast<std::size_t>(horizon) * states * actions, 0.0) {}

    double& V(int h, int s) { return v[static_cast<std::size_t>(h) * num_states + s]; }
    double V(int h, int s) const { return v[static_cast<std::size_t>(h) * num_states + s]; }
    double& Q(int h, int s, int a) { return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a]; }
    double Q(int h, int s, int a) const { return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a]; }
    std::span<const double> Q_row(int h, int s) const {
        return std::span<const double>(q).subspan((static_cast<std::size_t>(h) * num_states + s) * num_actions,
                                                  static_cast<std::size_t>(num_actions));
    }
};

struct JointSolution {
    double value = 0.0;                // V*_1 at the initial joint state
    std::vector<double> values;        // V*[h][joint state], h = 0..H
    JointDeterministicPolicy policy;   // lexicographically smallest argmax
};

/// Backward induction over all S^K joint states and A^K joint actions.
JointSolution joint_value_iteration(const MamdpSpec& spec, double budget = kDefaultExactBudget);

/// Expected return of a deterministic joint policy from the initial joint state.
double evaluate_joint_policy(const MamdpSpec& spec, const JointDeterministicPolicy& policy,
                             double budget = kDefaultExactBudget);

/// The joint table a decomposable policy induces.
JointDeterministicPolicy to_joint_policy(const MamdpSpec& spec, const DecomposablePolicy& policy,
                                         double budget = kDefaultExactBudget);

/// Forward-propagated occupancy of each agent from its initial state. Every
/// agent's rows must be defined wherever it can reach.
OccupancyMarginals occupancy_marginals(std::span<const AgentTransitions> transitions,
                                       std::span<const AgentPolicy> policies, std::span<const int> initial_states);

/**
 * Exact expected return of a decomposable policy. Because dynamics and policy
 * are both product-form, the expected reward at step h is a sum over the
 * product of per-agent occupancies, which is enumerated over its support.
 */
double evaluate_decomposable_policy(const MamdpSpec& spec, const DecomposablePolicy& policy,
                                    double budget = kDefaultExactBudget);

/**
 * Same recursion as evaluate_decomposable_policy but under `model` and with the
 * per-step reward augmented by Σ_i bonus[i][h](s^i, a^i).
 */
double evaluate_policy_under_model(std::span<const AgentTransitions> model, const MamdpSpec& spec,
                                   const DecomposablePolicy& policy, const BonusTable& bonus,
                                   double budget = kDefaultExactBudget);

/// R_{i,h}(s, a | π_[i-1]) for one cell. `prefix` holds the policies of agents
/// 0..agent-1; for agent 0 this is f({(s, a)}).
double exact_marginal_reward(const MamdpSpec& spec, std::span<const AgentPolicy> prefix, int agent, int h, int s,
                             int a, double budget = kDefaultExactBudget);

/// Every cell of R_{i,h}(s, a | π_[i-1]) as an [h][s][a] table.
std::vector<double> exact_marginal_rewards(const MamdpSpec& spec, std::span<const AgentPolicy> prefix, int agent,
                                           double budget = kDefaultExactBudget);

/// Same, with the prefix agents' occupancy computed under `transitions`.
std::vector<double> exact_marginal_rewards(const MamdpSpec& spec, std::span<const AgentTransitions> transitions,
                                           std::span<const AgentPolicy> prefix, int agent,
                                           double budget = kDefaultExactBudget);

/// Marginal value functions V^{π_i}(·; π_[i-1]) and Q^{π_i}(·, ·; π_[i-1]) of agent i.
ValueTables marginal_value_functions(const MamdpSpec& spec, std::span<const AgentPolicy> prefix,
                                     const AgentPolicy& policy, int agent, double budget = kDefaultExactBudget);

}  // namespace marls
