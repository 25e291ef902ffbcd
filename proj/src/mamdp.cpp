#include "marls/mamdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace marls {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
}

int draw_next(const AgentTransitions& p, int h, int s, int a, double u, UnvisitedFallback fallback) {
    if (p.defined(h, s, a)) return sample_from_row(p.row(h, s, a), u);
    switch (fallback) {
        case UnvisitedFallback::SelfLoop:
            return s;
        case UnvisitedFallback::Uniform:
            return std::min(p.num_states() - 1, static_cast<int>(u * p.num_states()));
        case UnvisitedFallback::None:
            break;
    }
    throw InvalidArgument("transition row (h=" + std::to_string(h) + ", s=" + std::to_string(s) +
                          ", a=" + std::to_string(a) + ") is undefined and no fallback is configured");
}

// Shared by sample_agent_trajectory and sample_trajectory_bank so both consume
// the stream identically: one draw per transition, none after the last step.
template <typename Emit>
void walk_agent(const AgentTransitions& p, const AgentPolicy& policy, int initial_state, Rng& rng,
                UnvisitedFallback fallback, Emit&& emit) {
    int s = initial_state;
    const int horizon = p.horizon();
    for (int h = 0; h < horizon; ++h) {
        const int a = policy.action(h, s);
        emit(h, s, a);
        if (h + 1 < horizon) s = draw_next(p, h, s, a, rng.uniform(), fallback);
    }
}

}  // namespace

// ---------------------------------------------------------------------------

AgentTransitions::AgentTransitions(int horizon, int num_states, int num_actions)
    : horizon_(horizon), states_(num_states), actions_(num_actions) {
    require(horizon >= 1 && num_states >= 1 && num_actions >= 1, "AgentTransitions: sizes must be >= 1");
    probs_.assign(static_cast<std::size_t>(horizon) * num_states * num_actions * num_states, 0.0);
    defined_.assign(static_cast<std::size_t>(horizon) * num_states * num_actions, 0);
}

AgentTransitions::AgentTransitions(int horizon, int num_states, int num_actions, std::vector<double> probs)
    : AgentTransitions(horizon, num_states, num_actions) {
    require(probs.size() == probs_.size(), "AgentTransitions: table has " + std::to_string(probs.size()) +
                                               " entries, expected " + std::to_string(probs_.size()));
    for (int h = 0; h < horizon; ++h)
        for (int s = 0; s < num_states; ++s)
            for (int a = 0; a < num_actions; ++a)
                set_row(h, s, a, std::span<const double>(probs).subspan(cell(h, s, a) * states_, states_));
}

bool AgentTransitions::fully_defined() const noexcept {
    return std::all_of(defined_.begin(), defined_.end(), [](char c) { return c != 0; });
}

std::span<const double> AgentTransitions::row(int h, int s, int a) const {
    return std::span<const double>(probs_).subspan(cell(h, s, a) * states_, states_);
}

void AgentTransitions::set_row(int h, int s, int a, std::span<const double> probs) {
    require(probs.size() == static_cast<std::size_t>(states_), "transition row has wrong length");
    double sum = 0.0;
    for (double p : probs) {
        require(std::isfinite(p) && p >= 0.0, "transition probabilities must be finite and nonnegative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) {
        throw InvalidArgument("transition row (h=" + std::to_string(h) + ", s=" + std::to_string(s) + ", a=" +
                              std::to_string(a) + ") sums to " + std::to_string(sum));
    }
    auto out = probs_.begin() + static_cast<std::ptrdiff_t>(cell(h, s, a) * states_);
    const double scale = std::abs(sum - 1.0) > 8 * std::numeric_limits<double>::epsilon() ? sum : 1.0;
    std::transform(probs.begin(), probs.end(), out, [scale](double p) { return p / scale; });
    defined_[cell(h, s, a)] = 1;
}

void AgentTransitions::set_row_unchecked(int h, int s, int a, std::span<const double> probs) {
    std::copy(probs.begin(), probs.end(), probs_.begin() + static_cast<std::ptrdiff_t>(cell(h, s, a) * states_));
    defined_[cell(h, s, a)] = 1;
}

AgentTransitions AgentTransitions::completed(UnvisitedFallback fallback) const {
    AgentTransitions out = *this;
    std::vector<double> row(static_cast<std::size_t>(states_));
    for (int h = 0; h < horizon_; ++h) {
        for (int s = 0; s < states_; ++s) {
            for (int a = 0; a < actions_; ++a) {
                if (defined(h, s, a)) continue;
                switch (fallback) {
                    case UnvisitedFallback::SelfLoop:
                        std::fill(row.begin(), row.end(), 0.0);
                        row[s] = 1.0;
                        break;
                    case UnvisitedFallback::Uniform:
                        std::fill(row.begin(), row.end(), 1.0 / states_);
                        break;
                    case UnvisitedFallback::None:
                        throw InvalidArgument("AgentTransitions::completed: undefined row and no fallback");
                }
                out.set_row_unchecked(h, s, a, row);
            }
        }
    }
    return out;
}

int sample_from_row(std::span<const double> row, double u) {
    double cumulative = 0.0;
    int last_positive = -1;
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] <= 0.0) continue;
        last_positive = static_cast<int>(k);
        cumulative += row[k];
        if (u < cumulative) return last_positive;
    }
    if (last_positive < 0) throw InvalidArgument("sample_from_row: row has no positive mass");
    return last_positive;
}

// ---------------------------------------------------------------------------

AgentPolicy::AgentPolicy(int horizon, int num_states, int fill)
    : horizon_(horizon), states_(num_states), actions_(static_cast<std::size_t>(horizon) * num_states, fill) {}

AgentPolicy::AgentPolicy(int horizon, int num_states, std::vector<int> actions)
    : horizon_(horizon), states_(num_states), actions_(std::move(actions)) {
    require(actions_.size() == static_cast<std::size_t>(horizon) * num_states, "AgentPolicy: table has wrong size");
}

DecomposablePolicy::DecomposablePolicy(int num_agents, int horizon, int num_states, int fill)
    : agents_(static_cast<std::size_t>(num_agents), AgentPolicy(horizon, num_states, fill)) {}

JointIndexer::JointIndexer(int radix, int agents) : radix_(radix), agents_(agents), size_(1) {
    require(radix >= 1 && agents >= 1, "JointIndexer: radix and agent count must be >= 1");
    for (int i = 0; i < agents; ++i) size_ *= static_cast<std::size_t>(radix);
}

std::size_t JointIndexer::encode(std::span<const int> digits) const {
    std::size_t idx = 0;
    for (int d : digits) idx = idx * radix_ + static_cast<std::size_t>(d);
    return idx;
}

void JointIndexer::decode(std::size_t index, std::span<int> digits) const {
    for (int i = agents_ - 1; i >= 0; --i) {
        digits[i] = static_cast<int>(index % radix_);
        index /= radix_;
    }
}

std::vector<int> JointIndexer::decode(std::size_t index) const {
    std::vector<int> out(static_cast<std::size_t>(agents_));
    decode(index, out);
    return out;
}

// ---------------------------------------------------------------------------

MamdpSpec::MamdpSpec(int num_states, int num_actions, int horizon, std::vector<AgentTransitions> dynamics,
                     std::vector<int> initial_state, OraclePtr oracle)
    : states_(num_states), actions_(num_actions), horizon_(horizon), dynamics_(std::move(dynamics)),
      initial_(std::move(initial_state)), oracle_(std::move(oracle)) {
    require(states_ >= 1 && actions_ >= 1, "MamdpSpec: S and A must be >= 1");
    require(horizon_ >= 1, "MamdpSpec: H must be >= 1");
    require(!dynamics_.empty(), "MamdpSpec: K must be >= 1");
    require(oracle_ != nullptr, "MamdpSpec: reward oracle is required");
    require(initial_.size() == dynamics_.size(), "MamdpSpec: initial state must have one entry per agent");
    for (int s : initial_) require(s >= 0 && s < states_, "MamdpSpec: initial state out of range");
    for (const auto& p : dynamics_) {
        require(p.horizon() == horizon_ && p.num_states() == states_ && p.num_actions() == actions_,
                "MamdpSpec: agent transition table has the wrong shape");
        require(p.fully_defined(), "MamdpSpec: every transition row must be defined");
    }
}

void MamdpSpec::check_policy(const DecomposablePolicy& policy) const {
    require(policy.num_agents() == num_agents(), "policy has " + std::to_string(policy.num_agents()) +
                                                      " agents, instance has " + std::to_string(num_agents()));
    for (const auto& pi : policy.agents()) {
        require(pi.horizon() == horizon_ && pi.num_states() == states_, "policy table has the wrong shape");
        for (int a : pi.table()) require(a >= 0 && a < actions_, "policy action out of range");
    }
}

// ---------------------------------------------------------------------------

double reward(const MamdpSpec& spec, std::span<const int> states, std::span<const int> actions) {
    const auto k = static_cast<std::size_t>(spec.num_agents());
    require(states.size() == k && actions.size() == k, "reward: joint state/action must have K entries");
    for (std::size_t i = 0; i < k; ++i) {
        require(states[i] >= 0 && states[i] < spec.num_states(), "reward: state out of range");
        require(actions[i] >= 0 && actions[i] < spec.num_actions(), "reward: action out of range");
    }
    return spec.oracle().eval(make_pair_set(states, actions));
}

int step(const MamdpSpec& spec, Rng& rng, int agent, int h, int s, int a) {
    require(agent >= 0 && agent < spec.num_agents(), "step: agent out of range");
    require(h >= 0 && h < spec.horizon(), "step: step index out of range");
    require(s >= 0 && s < spec.num_states() && a >= 0 && a < spec.num_actions(), "step: state/action out of range");
    return sample_from_row(spec.dynamics(agent).row(h, s, a), rng.uniform());
}

Episode run_episode(const MamdpSpec& spec, const DecomposablePolicy& policy, Rng& rng) {
    spec.check_policy(policy);
    const int k = spec.num_agents();
    const int horizon = spec.horizon();
    const Rng base(rng.next_u64());
    std::vector<Rng> streams;
    streams.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) streams.push_back(base.split(static_cast<std::uint64_t>(i)));

    Episode ep;
    ep.agents.resize(static_cast<std::size_t>(k));
    ep.rewards.reserve(static_cast<std::size_t>(horizon));
    std::vector<int> s(spec.initial_state().begin(), spec.initial_state().end());
    std::vector<int> a(static_cast<std::size_t>(k));
    for (int h = 0; h < horizon; ++h) {
        for (int i = 0; i < k; ++i) {
            a[i] = policy.action(i, h, s[i]);
            ep.agents[i].states.push_back(s[i]);
            ep.agents[i].actions.push_back(a[i]);
        }
        const double r = spec.oracle().eval(make_pair_set(s, a));
        ep.rewards.push_back(r);
        ep.total_return += r;
        for (int i = 0; i < k; ++i) s[i] = step(spec, streams[i], i, h, s[i], a[i]);
    }
    for (int i = 0; i < k; ++i) ep.agents[i].final_state = s[i];
    return ep;
}

AgentTrajectory sample_agent_trajectory(const AgentTransitions& transitions, const AgentPolicy& policy,
                                        int initial_state, Rng& rng, UnvisitedFallback fallback) {
    require(policy.horizon() == transitions.horizon() && policy.num_states() == transitions.num_states(),
            "sample_agent_trajectory: policy shape does not match transitions");
    AgentTrajectory tau;
    tau.states.reserve(static_cast<std::size_t>(transitions.horizon()));
    tau.actions.reserve(static_cast<std::size_t>(transitions.horizon()));
    walk_agent(transitions, policy, initial_state, rng, fallback, [&](int, int s, int a) {
        tau.states.push_back(s);
        tau.actions.push_back(a);
    });
    return tau;
}

void TrajectoryBank::set_trajectory(std::size_t l, const AgentTrajectory& tau) {
    require(tau.actions.size() == static_cast<std::size_t>(horizon_), "TrajectoryBank: trajectory length mismatch");
    for (int h = 0; h < horizon_; ++h) at(l, h) = tau.pair(h);
}

TrajectoryBank sample_trajectory_bank(const AgentTransitions& transitions, const AgentPolicy& policy,
                                      int initial_state, std::size_t samples, Rng& rng,
                                      UnvisitedFallback fallback) {
    require(policy.horizon() == transitions.horizon() && policy.num_states() == transitions.num_states(),
            "sample_trajectory_bank: policy shape does not match transitions");
    TrajectoryBank bank(samples, transitions.horizon());
    for (std::size_t l = 0; l < samples; ++l) {
        walk_agent(transitions, policy, initial_state, rng, fallback,
                   [&](int h, int s, int a) { bank.at(l, h) = GroundPair{s, a}; });
    }
    return bank;
}

}  // namespace marls
