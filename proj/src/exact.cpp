#include "marls/exact.hpp"

#include <cmath>
#include <string>

namespace marls {

namespace {

void check_budget(const char* what, double cells, double budget, const MamdpSpec& spec) {
    if (cells > budget) {
        throw BudgetExceeded(std::string(what) + ": S=" + std::to_string(spec.num_states()) +
                                 ", A=" + std::to_string(spec.num_actions()) + ", K=" + std::to_string(spec.num_agents()) +
                                 ", H=" + std::to_string(spec.horizon()),
                             cells, budget);
    }
}

double joint_cells(const MamdpSpec& spec) {
    const double k = spec.num_agents();
    return std::pow(static_cast<double>(spec.num_states()), k) * std::pow(static_cast<double>(spec.num_actions()), k) *
           spec.horizon();
}

/// Σ_{s'} Π_i P_{i,h}(s'^i | s^i, a^i) · next[s'], contracting one agent at a time
/// starting from the least significant digit (the last agent).
double expected_next_joint(const MamdpSpec& spec, int h, std::span<const int> s, std::span<const int> a,
                           std::span<const double> next, std::vector<double>& scratch) {
    const int k = spec.num_agents();
    const auto S = static_cast<std::size_t>(spec.num_states());
    scratch.assign(next.begin(), next.end());
    std::size_t size = scratch.size();
    for (int i = k - 1; i >= 0; --i) {
        const auto row = spec.dynamics(i).row(h, s[i], a[i]);
        const std::size_t outer = size / S;
        for (std::size_t j = 0; j < outer; ++j) {
            double acc = 0.0;
            for (std::size_t sp = 0; sp < S; ++sp) acc += row[sp] * scratch[j * S + sp];
            scratch[j] = acc;
        }
        size = outer;
    }
    return scratch[0];
}

struct SupportEntry {
    GroundPair pair;
    double prob;
};

/// Positive-mass (s, a) cells of one agent's occupancy at step h.
std::vector<SupportEntry> support(const OccupancyMarginals& d, int i, int h) {
    std::vector<SupportEntry> out;
    for (int s = 0; s < d.num_states(); ++s)
        for (int a = 0; a < d.num_actions(); ++a)
            if (d(i, h, s, a) > 0.0) out.push_back({{s, a}, d(i, h, s, a)});
    return out;
}

/// Calls visit(weight, pairs) for every configuration in the product of the
/// agents' supports at step h.
template <typename Visit>
void for_each_configuration(const std::vector<std::vector<SupportEntry>>& supports, Visit&& visit) {
    const std::size_t k = supports.size();
    if (k == 0) return;
    for (const auto& sup : supports)
        if (sup.empty()) return;
    std::vector<std::size_t> idx(k, 0);
    std::vector<GroundPair> pairs(k);
    while (true) {
        double w = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            w *= supports[j][idx[j]].prob;
            pairs[j] = supports[j][idx[j]].pair;
        }
        visit(w, PairSet(pairs));
        std::size_t pos = k;
        while (pos > 0) {
            --pos;
            if (++idx[pos] < supports[pos].size()) break;
            idx[pos] = 0;
            if (pos == 0) return;
        }
    }
}

double configuration_count(const std::vector<std::vector<SupportEntry>>& supports) {
    double n = 1.0;
    for (const auto& sup : supports) n *= static_cast<double>(sup.size());
    return n;
}

double evaluate_decomposable_impl(std::span<const AgentTransitions> transitions, const MamdpSpec& spec,
                                  const DecomposablePolicy& policy, const BonusTable* bonus, double budget) {
    spec.check_policy(policy);
    if (transitions.size() != static_cast<std::size_t>(spec.num_agents()))
        throw InvalidArgument("evaluate: need one transition model per agent");
    const int k = spec.num_agents();
    const int horizon = spec.horizon();
    const auto d = occupancy_marginals(transitions, policy.agents(), spec.initial_state());

    double total = 0.0;
    for (int h = 0; h < horizon; ++h) {
        std::vector<std::vector<SupportEntry>> supports;
        for (int i = 0; i < k; ++i) supports.push_back(support(d, i, h));
        check_budget("evaluate_decomposable_policy", configuration_count(supports) * horizon, budget, spec);
        double step_reward = 0.0;
        for_each_configuration(supports, [&](double w, const PairSet& set) { step_reward += w * spec.oracle().eval(set); });
        total += step_reward;
        if (bonus != nullptr) {
            for (int i = 0; i < k; ++i)
                for (const auto& e : supports[i]) total += e.prob * (*bonus)(i, h, e.pair.state, e.pair.action);
        }
    }
    return total;
}

}  // namespace

// ---------------------------------------------------------------------------

JointSolution joint_value_iteration(const MamdpSpec& spec, double budget) {
    check_budget("joint_value_iteration", joint_cells(spec), budget, spec);
    const int k = spec.num_agents();
    const int horizon = spec.horizon();
    const JointIndexer states(spec.num_states(), k);
    const JointIndexer actions(spec.num_actions(), k);
    const std::size_t njs = states.size();
    const std::size_t nja = actions.size();

    std::vector<double> r(njs * nja);
    std::vector<int> s(static_cast<std::size_t>(k)), a(static_cast<std::size_t>(k));
    for (std::size_t js = 0; js < njs; ++js) {
        states.decode(js, s);
        for (std::size_t ja = 0; ja < nja; ++ja) {
            actions.decode(ja, a);
            r[js * nja + ja] = spec.oracle().eval(make_pair_set(s, a));
        }
    }

    JointSolution sol;
    sol.values.assign(static_cast<std::size_t>(horizon + 1) * njs, 0.0);
    sol.policy = {horizon, njs, std::vector<std::size_t>(static_cast<std::size_t>(horizon) * njs, 0)};
    std::vector<double> q(nja), scratch;
    for (int h = horizon - 1; h >= 0; --h) {
        const std::span<const double> next(sol.values.data() + static_cast<std::size_t>(h + 1) * njs, njs);
        for (std::size_t js = 0; js < njs; ++js) {
            states.decode(js, s);
            for (std::size_t ja = 0; ja < nja; ++ja) {
                actions.decode(ja, a);
                q[ja] = r[js * nja + ja] + (h + 1 < horizon ? expected_next_joint(spec, h, s, a, next, scratch) : 0.0);
            }
            const std::size_t best = argmax_first(q);
            sol.values[static_cast<std::size_t>(h) * njs + js] = q[best];
            sol.policy.joint_action[static_cast<std::size_t>(h) * njs + js] = best;
        }
    }
    sol.value = sol.values[states.encode(spec.initial_state())];
    return sol;
}

double evaluate_joint_policy(const MamdpSpec& spec, const JointDeterministicPolicy& policy, double budget) {
    check_budget("evaluate_joint_policy", joint_cells(spec), budget, spec);
    const int k = spec.num_agents();
    const int horizon = spec.horizon();
    const JointIndexer states(spec.num_states(), k);
    const JointIndexer actions(spec.num_actions(), k);
    const std::size_t njs = states.size();
    if (policy.horizon != horizon || policy.num_joint_states != njs ||
        policy.joint_action.size() != static_cast<std::size_t>(horizon) * njs)
        throw InvalidArgument("evaluate_joint_policy: policy shape does not match instance");

    std::vector<double> next(njs, 0.0), cur(njs, 0.0), scratch;
    std::vector<int> s(static_cast<std::size_t>(k)), a(static_cast<std::size_t>(k));
    for (int h = horizon - 1; h >= 0; --h) {
        for (std::size_t js = 0; js < njs; ++js) {
            const std::size_t ja = policy.at(h, js);
            if (ja >= actions.size()) throw InvalidArgument("evaluate_joint_policy: joint action out of range");
            states.decode(js, s);
            actions.decode(ja, a);
            cur[js] = spec.oracle().eval(make_pair_set(s, a)) +
                      (h + 1 < horizon ? expected_next_joint(spec, h, s, a, next, scratch) : 0.0);
        }
        std::swap(cur, next);
    }
    return next[states.encode(spec.initial_state())];
}

JointDeterministicPolicy to_joint_policy(const MamdpSpec& spec, const DecomposablePolicy& policy, double budget) {
    spec.check_policy(policy);
    check_budget("to_joint_policy", joint_cells(spec), budget, spec);
    const int k = spec.num_agents();
    const JointIndexer states(spec.num_states(), k);
    const JointIndexer actions(spec.num_actions(), k);
    JointDeterministicPolicy out{spec.horizon(), states.size(),
                                 std::vector<std::size_t>(static_cast<std::size_t>(spec.horizon()) * states.size())};
    std::vector<int> s(static_cast<std::size_t>(k)), a(static_cast<std::size_t>(k));
    for (int h = 0; h < spec.horizon(); ++h) {
        for (std::size_t js = 0; js < states.size(); ++js) {
            states.decode(js, s);
            for (int i = 0; i < k; ++i) a[i] = policy.action(i, h, s[i]);
            out.joint_action[static_cast<std::size_t>(h) * states.size() + js] = actions.encode(a);
        }
    }
    return out;
}

OccupancyMarginals occupancy_marginals(std::span<const AgentTransitions> transitions,
                                       std::span<const AgentPolicy> policies, std::span<const int> initial_states) {
    if (policies.size() > transitions.size() || policies.size() > initial_states.size())
        throw InvalidArgument("occupancy_marginals: more policies than transition models or initial states");
    if (policies.empty()) return {};
    const int k = static_cast<int>(policies.size());
    const int horizon = transitions[0].horizon();
    const int S = transitions[0].num_states();
    const int A = transitions[0].num_actions();
    OccupancyMarginals d(k, horizon, S, A, 0.0);
    std::vector<double> mu(static_cast<std::size_t>(S)), next(static_cast<std::size_t>(S));
    for (int i = 0; i < k; ++i) {
        const auto& p = transitions[i];
        const auto& pi = policies[i];
        if (p.horizon() != horizon || p.num_states() != S || p.num_actions() != A || pi.horizon() != horizon ||
            pi.num_states() != S)
            throw InvalidArgument("occupancy_marginals: shape mismatch");
        std::fill(mu.begin(), mu.end(), 0.0);
        mu[initial_states[i]] = 1.0;
        for (int h = 0; h < horizon; ++h) {
            for (int s = 0; s < S; ++s)
                if (mu[s] > 0.0) d(i, h, s, pi.action(h, s)) = mu[s];
            if (h + 1 == horizon) break;
            std::fill(next.begin(), next.end(), 0.0);
            for (int s = 0; s < S; ++s) {
                if (mu[s] <= 0.0) continue;
                const int a = pi.action(h, s);
                if (!p.defined(h, s, a))
                    throw InvalidArgument("occupancy_marginals: reachable transition row is undefined");
                const auto row = p.row(h, s, a);
                for (int sp = 0; sp < S; ++sp) next[sp] += mu[s] * row[sp];
            }
            double sum = 0.0;
            for (double x : next) sum += x;
            if (std::abs(sum - 1.0) > 1e-12)
                for (double& x : next) x /= sum;
            std::swap(mu, next);
        }
    }
    return d;
}

double evaluate_decomposable_policy(const MamdpSpec& spec, const DecomposablePolicy& policy, double budget) {
    return evaluate_decomposable_impl(spec.all_dynamics(), spec, policy, nullptr, budget);
}

double evaluate_policy_under_model(std::span<const AgentTransitions> model, const MamdpSpec& spec,
                                   const DecomposablePolicy& policy, const BonusTable& bonus, double budget) {
    if (bonus.num_agents() != spec.num_agents() || bonus.horizon() != spec.horizon() ||
        bonus.num_states() != spec.num_states() || bonus.num_actions() != spec.num_actions())
        throw InvalidArgument("evaluate_policy_under_model: bonus table shape mismatch");
    return evaluate_decomposable_impl(model, spec, policy, &bonus, budget);
}

std::vector<double> exact_marginal_rewards(const MamdpSpec& spec, std::span<const AgentTransitions> transitions,
                                           std::span<const AgentPolicy> prefix, int agent, double budget) {
    if (agent < 0 || agent >= spec.num_agents()) throw InvalidArgument("exact_marginal_rewards: agent out of range");
    if (prefix.size() != static_cast<std::size_t>(agent))
        throw InvalidArgument("exact_marginal_rewards: prefix must hold the policies of agents 0..agent-1");
    const int horizon = spec.horizon();
    const int S = spec.num_states();
    const int A = spec.num_actions();
    const auto& f = spec.oracle();
    std::vector<double> out(static_cast<std::size_t>(horizon) * S * A, 0.0);
    auto at = [&](int h, int s, int a) -> double& { return out[(static_cast<std::size_t>(h) * S + s) * A + a]; };

    if (agent == 0) {
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const double v = f.eval(PairSet{{s, a}});
                for (int h = 0; h < horizon; ++h) at(h, s, a) = v;
            }
        return out;
    }

    const auto d = occupancy_marginals(transitions, prefix, spec.initial_state());
    for (int h = 0; h < horizon; ++h) {
        std::vector<std::vector<SupportEntry>> supports;
        for (int j = 0; j < agent; ++j) supports.push_back(support(d, j, h));
        check_budget("exact_marginal_reward", configuration_count(supports) * S * A * horizon, budget, spec);
        for_each_configuration(supports, [&](double w, const PairSet& base) {
            const double f_base = f.eval(base);
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    const GroundPair x{s, a};
                    if (!base.contains(x)) at(h, s, a) += w * (f.eval(base.with(x)) - f_base);
                }
        });
    }
    return out;
}

std::vector<double> exact_marginal_rewards(const MamdpSpec& spec, std::span<const AgentPolicy> prefix, int agent,
                                           double budget) {
    return exact_marginal_rewards(spec, spec.all_dynamics(), prefix, agent, budget);
}

double exact_marginal_reward(const MamdpSpec& spec, std::span<const AgentPolicy> prefix, int agent, int h, int s,
                             int a, double budget) {
    if (h < 0 || h >= spec.horizon() || s < 0 || s >= spec.num_states() || a < 0 || a >= spec.num_actions())
        throw InvalidArgument("exact_marginal_reward: index out of range");
    const auto table = exact_marginal_rewards(spec, prefix, agent, budget);
    return table[(static_cast<std::size_t>(h) * spec.num_states() + s) * spec.num_actions() + a];
}

ValueTables marginal_value_functions(const MamdpSpec& spec, std::span<const AgentPolicy> prefix,
                                     const AgentPolicy& policy, int agent, double budget) {
    const auto r = exact_marginal_rewards(spec, prefix, agent, budget);
    const int horizon = spec.horizon();
    const int S = spec.num_states();
    const int A = spec.num_actions();
    if (policy.horizon() != horizon || policy.num_states() != S)
        throw InvalidArgument("marginal_value_functions: policy shape mismatch");
    const auto& p = spec.dynamics(agent);
    ValueTables t(horizon, S, A);
    for (int h = horizon - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                double q = r[(static_cast<std::size_t>(h) * S + s) * A + a];
                const auto row = p.row(h, s, a);
                for (int sp = 0; sp < S; ++sp) q += row[sp] * t.V(h + 1, sp);
                t.Q(h, s, a) = q;
            }
            t.V(h, s) = t.Q(h, s, policy.action(h, s));
        }
    }
    return t;
}

}  // namespace marls
