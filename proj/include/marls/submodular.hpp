#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace marls {

/// Values closer than this are treated as equal by argmax tie-breaking and by
/// the exhaustive checkers.
inline constexpr double kValueTolerance = 1e-12;

/// One agent's (state, action) pair; the ground element of the reward set function.
struct GroundPair {
    int state = 0;
    int action = 0;

    auto operator<=>(const GroundPair&) const = default;
};

/**
 * Set of distinct ground pairs, kept sorted by (state, action).
 *
 * Two agents standing on the same state and taking the same action contribute a
 * single element. Because the representation is canonical, any two PairSets
 * with the same members compare equal and evaluate identically.
 */
class PairSet {
public:
    PairSet() = default;
    PairSet(std::initializer_list<GroundPair> pairs);
    explicit PairSet(std::span<const GroundPair> pairs);

    /// Returns false when `x` was already a member.
    bool insert(GroundPair x);
    bool contains(GroundPair x) const;
    PairSet with(GroundPair x) const;

    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    std::span<const GroundPair> members() const noexcept { return members_; }

    auto begin() const noexcept { return members_.begin(); }
    auto end() const noexcept { return members_.end(); }

    auto operator<=>(const PairSet&) const = default;

private:
    std::vector<GroundPair> members_;
};

/**
 * Oracle access to a set function f over state-action pairs.
 *
 * Implementations must be deterministic, return values in [0, 1], and be safe
 * to call concurrently (they are immutable after construction).
 */
class SetFunctionOracle {
public:
    virtual ~SetFunctionOracle() = default;
    virtual double eval(const PairSet& set) const = 0;
    virtual std::string kind() const = 0;
};

using OraclePtr = std::shared_ptr<const SetFunctionOracle>;

/// f(S) = |union of objects covered by members of S| / M.
class CoverageFunction final : public SetFunctionOracle {
public:
    struct Entry {
        GroundPair pair;
        std::vector<int> objects;
    };

    CoverageFunction(int num_objects, std::vector<Entry> covers);

    double eval(const PairSet& set) const override;
    std::string kind() const override { return "coverage"; }

    int num_objects() const noexcept { return num_objects_; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    /// Objects covered by `x`; empty if `x` covers nothing.
    std::span<const int> covered_by(GroundPair x) const;

private:
    int num_objects_;
    std::vector<Entry> entries_;
    std::map<GroundPair, std::size_t> index_;
};

/// f(S) = sum over objects of the best similarity offered by S, normalized so
/// that the full ground set scores 1.
class FacilityLocationFunction final : public SetFunctionOracle {
public:
    /// weights[o][p] is the similarity of object o to pairs[p].
    FacilityLocationFunction(std::vector<GroundPair> pairs, std::vector<std::vector<double>> weights);

    double eval(const PairSet& set) const override;
    std::string kind() const override { return "facility_location"; }

    const std::vector<GroundPair>& pairs() const noexcept { return pairs_; }
    const std::vector<std::vector<double>>& weights() const noexcept { return weights_; }

private:
    std::vector<GroundPair> pairs_;
    std::vector<std::vector<double>> weights_;
    std::map<GroundPair, std::size_t> index_;
    double normalizer_ = 0.0;
};

/// f(S) = sum of per-pair values; pairs not listed are worth 0.
class ModularFunction final : public SetFunctionOracle {
public:
    explicit ModularFunction(std::map<GroundPair, double> values);

    double eval(const PairSet& set) const override;
    std::string kind() const override { return "modular"; }

    double value(GroundPair x) const;
    const std::map<GroundPair, double>& values() const noexcept { return values_; }

private:
    std::map<GroundPair, double> values_;
};

/// f(base ∪ {x}) − f(base); exactly 0 when x is already in base.
double marginal_gain(const SetFunctionOracle& oracle, const PairSet& base, GroundPair x);

/// Witness of a failed monotonicity or submodularity check.
struct SubmodularityViolation {
    enum class Kind { NotMonotone, NotSubmodular };
    Kind kind;
    PairSet smaller;  // A
    PairSet larger;   // B, with A ⊆ B
    std::optional<GroundPair> added;  // x ∉ B (submodularity only)
    double smaller_value;  // Δf(A, x), or f(A)
    double larger_value;   // Δf(B, x), or f(B)
};

struct SubmodularityReport {
    bool passed = true;
    std::optional<SubmodularityViolation> witness;
    std::size_t checks = 0;
    /// Largest Δf(A,x) − Δf(B,x) seen; 0 (within tolerance) for modular functions.
    double max_gain_gap = 0.0;
};

inline constexpr std::size_t kDefaultExhaustiveLimit = 14;

/**
 * Exhaustively checks f(A) <= f(B) and Δf(A,x) >= Δf(B,x) for all A ⊆ B ⊆ ground
 * and x ∉ B. Loops run over x in ground order, then B and A by ascending bitmask,
 * and the first violation found is returned as the witness.
 *
 * Throws InvalidArgument if ground has duplicates and BudgetExceeded if it is
 * larger than `limit`.
 */
SubmodularityReport check_monotone_submodular(const SetFunctionOracle& oracle,
                                              std::span<const GroundPair> ground,
                                              std::size_t limit = kDefaultExhaustiveLimit);

/// Index of the first entry within kValueTolerance of the maximum.
std::size_t argmax_first(std::span<const double> values);

/**
 * Greedy maximization under the one-action-per-agent partition matroid: agents
 * pick in index order, each taking the action with the largest marginal gain
 * over the pairs already chosen (smallest action on ties).
 */
std::vector<int> partition_matroid_greedy(const SetFunctionOracle& oracle, std::span<const int> states,
                                          int num_actions);

struct PartitionOptimum {
    std::vector<int> actions;
    double value = 0.0;
};

inline constexpr double kDefaultPartitionBudget = 1e6;

/// Exact maximizer over all A^K joint actions; ties go to the lexicographically
/// smallest profile. Throws BudgetExceeded when A^K > budget.
PartitionOptimum brute_force_partition_optimum(const SetFunctionOracle& oracle, std::span<const int> states,
                                               int num_actions, double budget = kDefaultPartitionBudget);

/// Pair set {(states[i], actions[i])}.
PairSet make_pair_set(std::span<const int> states, std::span<const int> actions);

}  // namespace marls
