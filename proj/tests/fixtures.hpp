#pragma once

#include <memory>
#include <vector>

#include "marls/harness.hpp"
#include "marls/mamdp.hpp"
#include "marls/submodular.hpp"

namespace fixtures {

// covers(0,0) = {o1,o2}, covers(0,1) = {o2,o3}, M = 3.
inline marls::OraclePtr coverage_example() {
    return std::make_shared<marls::CoverageFunction>(
        3, std::vector<marls::CoverageFunction::Entry>{{{0, 0}, {0, 1}}, {{0, 1}, {1, 2}}});
}

class Constant final : public marls::SetFunctionOracle {
public:
    explicit Constant(double v) : v_(v) {}
    double eval(const marls::PairSet&) const override { return v_; }
    std::string kind() const override { return "constant"; }

private:
    double v_;
};

// f({a,b}) = 1, every other set 0.
class Synergy final : public marls::SetFunctionOracle {
public:
    double eval(const marls::PairSet& s) const override { return s.size() == 2 ? 1.0 : 0.0; }
    std::string kind() const override { return "synergy"; }
};

// Every row a point mass on next[h][s][a].
inline marls::AgentTransitions deterministic(int H, int S, int A, const std::vector<int>& next) {
    std::vector<double> p(static_cast<std::size_t>(H) * S * A * S, 0.0);
    for (std::size_t c = 0; c < next.size(); ++c) p[c * S + next[c]] = 1.0;
    return marls::AgentTransitions(H, S, A, std::move(p));
}

inline marls::AgentTransitions uniform(int H, int S, int A) {
    return marls::AgentTransitions(H, S, A, std::vector<double>(static_cast<std::size_t>(H) * S * A * S, 1.0 / S));
}

inline marls::MamdpSpec generated(int K, int S, int A, int H, std::uint64_t seed,
                                  marls::OracleKind oracle = marls::OracleKind::Coverage,
                                  marls::GeneratorKind kind = marls::GeneratorKind::RandomDirichlet) {
    marls::GeneratorSpec g;
    g.kind = kind;
    g.num_agents = K;
    g.num_states = S;
    g.num_actions = A;
    g.horizon = H;
    g.oracle = oracle;
    g.seed = seed;
    return marls::generate_instance(g);
}

// H = 1, K = 2, both agents at state 0, coverage example reward.
inline marls::MamdpSpec coverage_example_instance(int H = 1) {
    std::vector<marls::AgentTransitions> d(2, uniform(H, 1, 2));
    return marls::MamdpSpec(1, 2, H, std::move(d), {0, 0}, coverage_example());
}

}  // namespace fixtures
