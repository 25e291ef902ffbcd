#include "marls/submodular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "marls/errors.hpp"

namespace marls {

PairSet::PairSet(std::initializer_list<GroundPair> pairs) : PairSet(std::span<const GroundPair>(pairs.begin(), pairs.size())) {}

PairSet::PairSet(std::span<const GroundPair> pairs) : members_(pairs.begin(), pairs.end()) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

bool PairSet::insert(GroundPair x) {
    auto it = std::lower_bound(members_.begin(), members_.end(), x);
    if (it != members_.end() && *it == x) return false;
    members_.insert(it, x);
    return true;
}

bool PairSet::contains(GroundPair x) const { return std::binary_search(members_.begin(), members_.end(), x); }

PairSet PairSet::with(GroundPair x) const {
    PairSet out = *this;
    out.insert(x);
    return out;
}

PairSet make_pair_set(std::span<const int> states, std::span<const int> actions) {
    if (states.size() != actions.size()) throw InvalidArgument("make_pair_set: states and actions differ in length");
    PairSet out;
    for (std::size_t i = 0; i < states.size(); ++i) out.insert({states[i], actions[i]});
    return out;
}

// ---------------------------------------------------------------------------

CoverageFunction::CoverageFunction(int num_objects, std::vector<Entry> covers)
    : num_objects_(num_objects), entries_(std::move(covers)) {
    if (num_objects_ < 1) throw InvalidArgument("CoverageFunction: num_objects must be >= 1");
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        auto& e = entries_[k];
        for (int o : e.objects) {
            if (o < 0 || o >= num_objects_) throw InvalidArgument("CoverageFunction: object id out of range");
        }
        std::sort(e.objects.begin(), e.objects.end());
        e.objects.erase(std::unique(e.objects.begin(), e.objects.end()), e.objects.end());
        if (!index_.emplace(e.pair, k).second) throw InvalidArgument("CoverageFunction: duplicate pair in covers");
    }
}

std::span<const int> CoverageFunction::covered_by(GroundPair x) const {
    auto it = index_.find(x);
    if (it == index_.end()) return {};
    return entries_[it->second].objects;
}

double CoverageFunction::eval(const PairSet& set) const {
    std::vector<char> hit(static_cast<std::size_t>(num_objects_), 0);
    int count = 0;
    for (const auto& x : set) {
        for (int o : covered_by(x)) {
            if (!hit[o]) {
                hit[o] = 1;
                ++count;
            }
        }
    }
    return static_cast<double>(count) / num_objects_;
}

// ---------------------------------------------------------------------------

FacilityLocationFunction::FacilityLocationFunction(std::vector<GroundPair> pairs,
                                                   std::vector<std::vector<double>> weights)
    : pairs_(std::move(pairs)), weights_(std::move(weights)) {
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
        if (!index_.emplace(pairs_[p], p).second) throw InvalidArgument("FacilityLocationFunction: duplicate pair");
    }
    for (const auto& row : weights_) {
        if (row.size() != pairs_.size()) throw InvalidArgument("FacilityLocationFunction: weight row has wrong length");
        double best = 0.0;
        for (double w : row) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("FacilityLocationFunction: weights must be finite and >= 0");
            best = std::max(best, w);
        }
        normalizer_ += best;
    }
}

double FacilityLocationFunction::eval(const PairSet& set) const {
    if (normalizer_ <= 0.0) return 0.0;
    std::vector<std::size_t> cols;
    cols.reserve(set.size());
    for (const auto& x : set) {
        if (auto it = index_.find(x); it != index_.end()) cols.push_back(it->second);
    }
    double total = 0.0;
    for (const auto& row : weights_) {
        double best = 0.0;
        for (std::size_t c : cols) best = std::max(best, row[c]);
        total += best;
    }
    return total / normalizer_;
}

// ---------------------------------------------------------------------------

ModularFunction::ModularFunction(std::map<GroundPair, double> values) : values_(std::move(values)) {
    for (const auto& [x, v] : values_) {
        if (!(v >= 0.0) || v > 1.0) throw InvalidArgument("ModularFunction: values must lie in [0, 1]");
    }
}

double ModularFunction::value(GroundPair x) const {
    auto it = values_.find(x);
    return it == values_.end() ? 0.0 : it->second;
}

double ModularFunction::eval(const PairSet& set) const {
    double total = 0.0;
    for (const auto& x : set) total += value(x);
    return total;
}

// ---------------------------------------------------------------------------

double marginal_gain(const SetFunctionOracle& oracle, const PairSet& base, GroundPair x) {
    if (base.contains(x)) return 0.0;
    return oracle.eval(base.with(x)) - oracle.eval(base);
}

namespace {

PairSet subset_from_mask(std::span<const GroundPair> ground, std::uint32_t mask) {
    PairSet out;
    for (std::size_t k = 0; k < ground.size(); ++k) {
        if (mask & (1u << k)) out.insert(ground[k]);
    }
    return out;
}

}  // namespace

SubmodularityReport check_monotone_submodular(const SetFunctionOracle& oracle, std::span<const GroundPair> ground,
                                              std::size_t limit) {
    if (ground.size() > limit || ground.size() > 24) {
        throw BudgetExceeded("check_monotone_submodular: ground set of " + std::to_string(ground.size()) +
                                 " pairs exceeds exhaustive limit " + std::to_string(limit),
                             std::ldexp(1.0, static_cast<int>(ground.size())), std::ldexp(1.0, static_cast<int>(limit)));
    }
    if (PairSet(ground).size() != ground.size()) throw InvalidArgument("check_monotone_submodular: duplicate ground pairs");

    const std::size_t n = ground.size();
    const std::uint32_t full = (n == 0) ? 0u : ((1u << n) - 1u);
    std::vector<double> f(static_cast<std::size_t>(full) + 1);
    for (std::uint32_t m = 0; m <= full; ++m) f[m] = oracle.eval(subset_from_mask(ground, m));

    SubmodularityReport report;
    auto fail = [&](SubmodularityViolation::Kind kind, std::uint32_t a, std::uint32_t b, std::optional<GroundPair> x,
                    double va, double vb) {
        report.passed = false;
        report.witness = SubmodularityViolation{kind, subset_from_mask(ground, a), subset_from_mask(ground, b), x, va, vb};
    };

    // Monotonicity over every nested pair A ⊆ B.
    for (std::uint32_t b = 0; b <= full && report.passed; ++b) {
        for (std::uint32_t a = 0;; a = (a - b) & b) {  // ascending submasks of b
            ++report.checks;
            if (f[a] > f[b] + kValueTolerance) {
                fail(SubmodularityViolation::Kind::NotMonotone, a, b, std::nullopt, f[a], f[b]);
                break;
            }
            if (a == b) break;
        }
    }
    if (!report.passed) return report;

    for (std::size_t xi = 0; xi < n && report.passed; ++xi) {
        const std::uint32_t xbit = 1u << xi;
        const std::uint32_t rest = full & ~xbit;
        for (std::uint32_t b = 0; b <= full && report.passed; ++b) {
            if (b & ~rest) continue;
            const double gain_b = f[b | xbit] - f[b];
            for (std::uint32_t a = 0;; a = (a - b) & b) {
                ++report.checks;
                const double gain_a = f[a | xbit] - f[a];
                report.max_gain_gap = std::max(report.max_gain_gap, gain_a - gain_b);
                if (gain_a < gain_b - kValueTolerance) {
                    fail(SubmodularityViolation::Kind::NotSubmodular, a, b, ground[xi], gain_a, gain_b);
                    break;
                }
                if (a == b) break;
            }
        }
    }
    return report;
}

std::size_t argmax_first(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("argmax_first: empty range");
    const double best = *std::max_element(values.begin(), values.end());
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] >= best - kValueTolerance) return k;
    }
    return 0;
}

std::vector<int> partition_matroid_greedy(const SetFunctionOracle& oracle, std::span<const int> states,
                                          int num_actions) {
    if (states.empty()) throw InvalidArgument("partition_matroid_greedy: need at least one agent");
    if (num_actions < 1) throw InvalidArgument("partition_matroid_greedy: need at least one action");
    PairSet chosen;
    std::vector<int> actions;
    actions.reserve(states.size());
    std::vector<double> gains(static_cast<std::size_t>(num_actions));
    for (int s : states) {
        for (int a = 0; a < num_actions; ++a) gains[a] = marginal_gain(oracle, chosen, {s, a});
        const int pick = static_cast<int>(argmax_first(gains));
        actions.push_back(pick);
        chosen.insert({s, pick});
    }
    return actions;
}

PartitionOptimum brute_force_partition_optimum(const SetFunctionOracle& oracle, std::span<const int> states,
                                               int num_actions, double budget) {
    if (states.empty()) throw InvalidArgument("brute_force_partition_optimum: need at least one agent");
    if (num_actions < 1) throw InvalidArgument("brute_force_partition_optimum: need at least one action");
    const double profiles = std::pow(static_cast<double>(num_actions), static_cast<double>(states.size()));
    if (profiles > budget) {
        throw BudgetExceeded("brute_force_partition_optimum: A^K with A=" + std::to_string(num_actions) +
                                 ", K=" + std::to_string(states.size()),
                             profiles, budget);
    }
    const std::size_t k = states.size();
    std::vector<int> current(k, 0);
    PartitionOptimum best{current, -std::numeric_limits<double>::infinity()};
    while (true) {
        const double v = oracle.eval(make_pair_set(states, current));
        if (v > best.value + kValueTolerance) best = {current, v};
        // lexicographic increment, last agent fastest
        std::size_t pos = k;
        while (pos > 0) {
            --pos;
            if (++current[pos] < num_actions) break;
            current[pos] = 0;
            if (pos == 0) return best;
        }
    }
}

}  // namespace marls
