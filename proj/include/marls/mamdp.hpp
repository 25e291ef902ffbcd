#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "marls/errors.hpp"
#include "marls/rng.hpp"
#include "marls/submodular.hpp"

namespace marls {

// Steps, agents, states and actions are 0-based throughout: step h runs over
// 0..H-1 and agent i over 0..K-1.

/// Row-sum tolerance accepted when loading transition tables.
inline constexpr double kRowTolerance = 1e-9;

/// How to sample from a transition row that has no data behind it.
enum class UnvisitedFallback {
    None,      ///< throw
    SelfLoop,  ///< stay in the current state
    Uniform,   ///< uniform over all states
};

/// Dense table indexed [agent][step][state][action].
template <typename T>
class PairTable {
public:
    PairTable() = default;
    PairTable(int agents, int horizon, int states, int actions, T init = T{})
        : agents_(agents), horizon_(horizon), states_(states), actions_(actions),
          data_(static_cast<std::size_t>(agents) * horizon * states * actions, init) {}

    int num_agents() const noexcept { return agents_; }
    int horizon() const noexcept { return horizon_; }
    int num_states() const noexcept { return states_; }
    int num_actions() const noexcept { return actions_; }

    T& operator()(int i, int h, int s, int a) { return data_[index(i, h, s, a)]; }
    const T& operator()(int i, int h, int s, int a) const { return data_[index(i, h, s, a)]; }

    std::span<const T> flat() const noexcept { return data_; }

private:
    std::size_t index(int i, int h, int s, int a) const {
        return ((static_cast<std::size_t>(i) * horizon_ + h) * states_ + s) * actions_ + a;
    }

    int agents_ = 0, horizon_ = 0, states_ = 0, actions_ = 0;
    std::vector<T> data_;
};

/**
 * One agent's step-dependent transition kernel P_h(s' | s, a).
 *
 * Rows may be undefined, which is how an empirical model marks (h, s, a)
 * cells that were never visited. The true dynamics of an instance always have
 * every row defined.
 */
class AgentTransitions {
public:
    AgentTransitions() = default;
    /// All rows undefined (and zero).
    AgentTransitions(int horizon, int num_states, int num_actions);
    /// Dense [h][s][a][s'] table; every row is validated and renormalized.
    AgentTransitions(int horizon, int num_states, int num_actions, std::vector<double> probs);

    int horizon() const noexcept { return horizon_; }
    int num_states() const noexcept { return states_; }
    int num_actions() const noexcept { return actions_; }

    bool defined(int h, int s, int a) const { return defined_[cell(h, s, a)] != 0; }
    bool fully_defined() const noexcept;
    std::span<const double> row(int h, int s, int a) const;

    /// Validates the row sums to 1 within kRowTolerance, then renormalizes it.
    void set_row(int h, int s, int a, std::span<const double> probs);
    /// Sets an already-normalized row without revalidation (e.g. exact count ratios).
    void set_row_unchecked(int h, int s, int a, std::span<const double> probs);

    /// Copy with every undefined row replaced according to `fallback`.
    AgentTransitions completed(UnvisitedFallback fallback) const;

private:
    std::size_t cell(int h, int s, int a) const {
        return (static_cast<std::size_t>(h) * states_ + s) * actions_ + a;
    }

    int horizon_ = 0, states_ = 0, actions_ = 0;
    std::vector<double> probs_;
    std::vector<char> defined_;
};

/// Inverse-CDF draw: cumulative sums run left to right and the last state with
/// positive mass absorbs any rounding residue.
int sample_from_row(std::span<const double> row, double u);

/// Deterministic per-agent action table π_i[h][s].
class AgentPolicy {
public:
    AgentPolicy() = default;
    AgentPolicy(int horizon, int num_states, int fill = 0);
    AgentPolicy(int horizon, int num_states, std::vector<int> actions);

    int horizon() const noexcept { return horizon_; }
    int num_states() const noexcept { return states_; }
    int action(int h, int s) const { return actions_[static_cast<std::size_t>(h) * states_ + s]; }
    void set(int h, int s, int a) { actions_[static_cast<std::size_t>(h) * states_ + s] = a; }
    const std::vector<int>& table() const noexcept { return actions_; }

    bool operator==(const AgentPolicy&) const = default;

private:
    int horizon_ = 0, states_ = 0;
    std::vector<int> actions_;
};

/// Product of independent per-agent deterministic policies.
class DecomposablePolicy {
public:
    DecomposablePolicy() = default;
    explicit DecomposablePolicy(std::vector<AgentPolicy> agents) : agents_(std::move(agents)) {}
    DecomposablePolicy(int num_agents, int horizon, int num_states, int fill = 0);

    int num_agents() const noexcept { return static_cast<int>(agents_.size()); }
    const AgentPolicy& agent(int i) const { return agents_.at(static_cast<std::size_t>(i)); }
    AgentPolicy& agent(int i) { return agents_.at(static_cast<std::size_t>(i)); }
    std::span<const AgentPolicy> agents() const noexcept { return agents_; }
    int action(int i, int h, int s) const { return agent(i).action(h, s); }

    bool operator==(const DecomposablePolicy&) const = default;

private:
    std::vector<AgentPolicy> agents_;
};

/// Mixed-radix encoding of joint states/actions; agent 0 is the most significant digit.
class JointIndexer {
public:
    JointIndexer(int radix, int agents);

    std::size_t size() const noexcept { return size_; }
    std::size_t encode(std::span<const int> digits) const;
    void decode(std::size_t index, std::span<int> digits) const;
    std::vector<int> decode(std::size_t index) const;

private:
    int radix_;
    int agents_;
    std::size_t size_;
};

/// Deterministic joint policy: one joint action per (step, joint state).
struct JointDeterministicPolicy {
    int horizon = 0;
    std::size_t num_joint_states = 0;
    std::vector<std::size_t> joint_action;  // [h * num_joint_states + js], encoded joint action

    std::size_t at(int h, std::size_t js) const { return joint_action[static_cast<std::size_t>(h) * num_joint_states + js]; }
};

/**
 * A MAMDP-SR instance: K agents over shared state/action spaces with
 * independent per-agent dynamics and a set-function reward on the agents'
 * current state-action pairs. Immutable once constructed.
 */
class MamdpSpec {
public:
    MamdpSpec(int num_states, int num_actions, int horizon, std::vector<AgentTransitions> dynamics,
              std::vector<int> initial_state, OraclePtr oracle);

    int num_states() const noexcept { return states_; }
    int num_actions() const noexcept { return actions_; }
    int num_agents() const noexcept { return static_cast<int>(dynamics_.size()); }
    int horizon() const noexcept { return horizon_; }

    const AgentTransitions& dynamics(int i) const { return dynamics_.at(static_cast<std::size_t>(i)); }
    std::span<const AgentTransitions> all_dynamics() const noexcept { return dynamics_; }
    std::span<const int> initial_state() const noexcept { return initial_; }
    const SetFunctionOracle& oracle() const noexcept { return *oracle_; }
    const OraclePtr& oracle_ptr() const noexcept { return oracle_; }

    /// Throws InvalidArgument unless `policy` has K agents of shape H × S with valid actions.
    void check_policy(const DecomposablePolicy& policy) const;

private:
    int states_, actions_, horizon_;
    std::vector<AgentTransitions> dynamics_;
    std::vector<int> initial_;
    OraclePtr oracle_;
};

/// One agent's path: states[h], actions[h] for h < H, plus the state reached
/// after the last step when it was sampled (-1 otherwise).
struct AgentTrajectory {
    std::vector<int> states;
    std::vector<int> actions;
    int final_state = -1;

    GroundPair pair(int h) const { return {states[static_cast<std::size_t>(h)], actions[static_cast<std::size_t>(h)]}; }
    int next_state(int h) const {
        return static_cast<std::size_t>(h) + 1 < states.size() ? states[static_cast<std::size_t>(h) + 1] : final_state;
    }
};

struct Episode {
    std::vector<AgentTrajectory> agents;
    std::vector<double> rewards;  // per step
    double total_return = 0.0;
};

/// r(s, a) = f({(s^i, a^i)}), duplicates collapsed.
double reward(const MamdpSpec& spec, std::span<const int> states, std::span<const int> actions);

/// Samples agent i's next state from P_{i,h}(· | s, a) with one draw from `rng`.
int step(const MamdpSpec& spec, Rng& rng, int agent, int h, int s, int a);

/**
 * Runs one episode from the fixed initial joint state. Draws a single key from
 * `rng` and gives each agent its own child stream, so agents' transitions are
 * independent and reproducible.
 */
Episode run_episode(const MamdpSpec& spec, const DecomposablePolicy& policy, Rng& rng);

/**
 * Samples a single agent's H-step path under `transitions` and `policy`.
 * No reward is evaluated and the post-horizon state is not drawn. Undefined
 * rows are resolved with `fallback`; with UnvisitedFallback::None they throw.
 */
AgentTrajectory sample_agent_trajectory(const AgentTransitions& transitions, const AgentPolicy& policy,
                                        int initial_state, Rng& rng,
                                        UnvisitedFallback fallback = UnvisitedFallback::None);

/// N sampled paths of one agent, stored as pairs [sample][step].
class TrajectoryBank {
public:
    TrajectoryBank() = default;
    TrajectoryBank(std::size_t samples, int horizon)
        : samples_(samples), horizon_(horizon), pairs_(samples * static_cast<std::size_t>(horizon)) {}

    std::size_t samples() const noexcept { return samples_; }
    int horizon() const noexcept { return horizon_; }
    GroundPair at(std::size_t l, int h) const { return pairs_[l * static_cast<std::size_t>(horizon_) + h]; }
    GroundPair& at(std::size_t l, int h) { return pairs_[l * static_cast<std::size_t>(horizon_) + h]; }

    void set_trajectory(std::size_t l, const AgentTrajectory& tau);

private:
    std::size_t samples_ = 0;
    int horizon_ = 0;
    std::vector<GroundPair> pairs_;
};

/// Fills a bank with `samples` independent paths, equivalent to repeated
/// sample_agent_trajectory calls on the same stream.
TrajectoryBank sample_trajectory_bank(const AgentTransitions& transitions, const AgentPolicy& policy,
                                      int initial_state, std::size_t samples, Rng& rng,
                                      UnvisitedFallback fallback = UnvisitedFallback::None);

}  // namespace marls
