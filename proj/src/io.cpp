#include "marls/io.hpp"

#include <algorithm>
#include <fstream>

namespace marls::io {

namespace {

GroundPair pair_from(const json& j) { return {j.at("state").get<int>(), j.at("action").get<int>()}; }

json pair_json(GroundPair x) { return {{"state", x.state}, {"action", x.action}}; }

}  // namespace

OraclePtr oracle_from_json(const json& j) {
    const std::string kind = j.value("kind", std::string("coverage"));
    try {
        if (kind == "coverage") {
            std::vector<CoverageFunction::Entry> covers;
            for (const auto& e : j.at("covers")) covers.push_back({pair_from(e), e.at("objects").get<std::vector<int>>()});
            return std::make_shared<CoverageFunction>(j.at("num_objects").get<int>(), std::move(covers));
        }
        if (kind == "facility_location") {
            std::vector<GroundPair> pairs;
            for (const auto& e : j.at("pairs")) pairs.push_back(pair_from(e));
            return std::make_shared<FacilityLocationFunction>(std::move(pairs),
                                                              j.at("weights").get<std::vector<std::vector<double>>>());
        }
        if (kind == "modular") {
            std::map<GroundPair, double> values;
            for (const auto& e : j.at("values")) values[pair_from(e)] = e.at("value").get<double>();
            return std::make_shared<ModularFunction>(std::move(values));
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed ") + kind + " oracle: " + e.what());
    }
    throw InvalidArgument("unknown oracle kind '" + kind + "'");
}

json oracle_to_json(const SetFunctionOracle& oracle) {
    if (const auto* c = dynamic_cast<const CoverageFunction*>(&oracle)) {
        json covers = json::array();
        for (const auto& e : c->entries()) {
            json item = pair_json(e.pair);
            item["objects"] = e.objects;
            covers.push_back(std::move(item));
        }
        return {{"kind", "coverage"}, {"num_objects", c->num_objects()}, {"covers", std::move(covers)}};
    }
    if (const auto* f = dynamic_cast<const FacilityLocationFunction*>(&oracle)) {
        json pairs = json::array();
        for (const auto& x : f->pairs()) pairs.push_back(pair_json(x));
        return {{"kind", "facility_location"}, {"pairs", std::move(pairs)}, {"weights", f->weights()}};
    }
    if (const auto* m = dynamic_cast<const ModularFunction*>(&oracle)) {
        json values = json::array();
        for (const auto& [x, v] : m->values()) {
            json item = pair_json(x);
            item["value"] = v;
            values.push_back(std::move(item));
        }
        return {{"kind", "modular"}, {"values", std::move(values)}};
    }
    throw InvalidArgument("oracle_to_json: oracle kind '" + oracle.kind() + "' has no file representation");
}

OraclePtr load_oracle(const std::filesystem::path& path) { return oracle_from_json(read_json(path)); }

std::vector<GroundPair> declared_pairs(const SetFunctionOracle& oracle) {
    std::vector<GroundPair> out;
    if (const auto* c = dynamic_cast<const CoverageFunction*>(&oracle)) {
        for (const auto& e : c->entries()) out.push_back(e.pair);
    } else if (const auto* f = dynamic_cast<const FacilityLocationFunction*>(&oracle)) {
        out = f->pairs();
    } else if (const auto* m = dynamic_cast<const ModularFunction*>(&oracle)) {
        for (const auto& [x, v] : m->values()) out.push_back(x);
    } else {
        throw InvalidArgument("declared_pairs: oracle kind '" + oracle.kind() + "' has no declared pairs");
    }
    std::sort(out.begin(), out.end());
    return out;
}

MamdpSpec instance_from_json(const json& j, const std::filesystem::path& base_dir) {
    try {
        const int S = j.at("num_states").get<int>();
        const int A = j.at("num_actions").get<int>();
        const int K = j.at("num_agents").get<int>();
        const int H = j.at("horizon").get<int>();
        if (S < 1 || A < 1 || K < 1 || H < 1) throw InvalidArgument("instance sizes must be >= 1");
        const auto& tr = j.at("transitions");
        if (!tr.is_array() || tr.size() != static_cast<std::size_t>(K))
            throw InvalidArgument("instance: transitions must have one entry per agent");
        std::vector<AgentTransitions> dynamics;
        for (const auto& agent : tr) {
            std::vector<double> flat;
            flat.reserve(static_cast<std::size_t>(H) * S * A * S);
            if (agent.size() != static_cast<std::size_t>(H)) throw InvalidArgument("instance: transitions[i] must have H steps");
            for (const auto& step : agent) {
                if (step.size() != static_cast<std::size_t>(S)) throw InvalidArgument("instance: transitions[i][h] must have S states");
                for (const auto& state : step) {
                    if (state.size() != static_cast<std::size_t>(A)) throw InvalidArgument("instance: transitions[i][h][s] must have A actions");
                    for (const auto& row : state) {
                        if (row.size() != static_cast<std::size_t>(S)) throw InvalidArgument("instance: transition row must have S entries");
                        for (const auto& p : row) flat.push_back(p.get<double>());
                    }
                }
            }
            dynamics.emplace_back(H, S, A, std::move(flat));
        }
        OraclePtr oracle;
        if (j.contains("oracle")) {
            oracle = oracle_from_json(j.at("oracle"));
        } else if (j.contains("oracle_file")) {
            std::filesystem::path p = j.at("oracle_file").get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            oracle = load_oracle(p);
        } else {
            throw InvalidArgument("instance: needs \"oracle\" or \"oracle_file\"");
        }
        return MamdpSpec(S, A, H, std::move(dynamics), j.at("initial_state").get<std::vector<int>>(), std::move(oracle));
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed instance: ") + e.what());
    }
}

json instance_to_json(const MamdpSpec& spec) {
    const int S = spec.num_states();
    const int A = spec.num_actions();
    json tr = json::array();
    for (const auto& p : spec.all_dynamics()) {
        json agent = json::array();
        for (int h = 0; h < spec.horizon(); ++h) {
            json step = json::array();
            for (int s = 0; s < S; ++s) {
                json state = json::array();
                for (int a = 0; a < A; ++a) {
                    const auto row = p.row(h, s, a);
                    state.push_back(std::vector<double>(row.begin(), row.end()));
                }
                step.push_back(std::move(state));
            }
            agent.push_back(std::move(step));
        }
        tr.push_back(std::move(agent));
    }
    return {{"num_states", S},
            {"num_actions", A},
            {"num_agents", spec.num_agents()},
            {"horizon", spec.horizon()},
            {"transitions", std::move(tr)},
            {"initial_state", std::vector<int>(spec.initial_state().begin(), spec.initial_state().end())},
            {"oracle", oracle_to_json(spec.oracle())}};
}

MamdpSpec load_instance(const std::filesystem::path& path) {
    return instance_from_json(read_json(path), path.parent_path());
}

DecomposablePolicy policy_from_json(const json& j) {
    const json& table = j.is_object() ? j.at("action_table") : j;
    try {
        std::vector<AgentPolicy> agents;
        for (const auto& agent : table) {
            const int H = static_cast<int>(agent.size());
            if (H < 1) throw InvalidArgument("policy: agent table has no steps");
            const int S = static_cast<int>(agent.at(0).size());
            std::vector<int> flat;
            for (const auto& step : agent) {
                if (step.size() != static_cast<std::size_t>(S)) throw InvalidArgument("policy: ragged action table");
                for (const auto& a : step) flat.push_back(a.get<int>());
            }
            agents.emplace_back(H, S, std::move(flat));
        }
        return DecomposablePolicy(std::move(agents));
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed policy: ") + e.what());
    }
}

json policy_to_json(const DecomposablePolicy& policy) {
    json table = json::array();
    for (const auto& pi : policy.agents()) {
        json agent = json::array();
        for (int h = 0; h < pi.horizon(); ++h) {
            json step = json::array();
            for (int s = 0; s < pi.num_states(); ++s) step.push_back(pi.action(h, s));
            agent.push_back(std::move(step));
        }
        table.push_back(std::move(agent));
    }
    return {{"action_table", std::move(table)}};
}

DecomposablePolicy load_policy(const std::filesystem::path& path) { return policy_from_json(read_json(path)); }

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

UnvisitedFallback parse_fallback(const std::string& name) {
    if (name == "self-loop") return UnvisitedFallback::SelfLoop;
    if (name == "uniform") return UnvisitedFallback::Uniform;
    if (name == "none") return UnvisitedFallback::None;
    throw InvalidArgument("unknown fallback '" + name + "' (expected self-loop|uniform|none)");
}

std::string to_string(UnvisitedFallback fallback) {
    switch (fallback) {
        case UnvisitedFallback::SelfLoop: return "self-loop";
        case UnvisitedFallback::Uniform: return "uniform";
        case UnvisitedFallback::None: return "none";
    }
    return "none";
}

}  // namespace marls::io
