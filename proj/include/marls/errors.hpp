#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace marls {

/// Malformed input: out-of-range indices, shape mismatches, invalid parameters.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An exhaustive routine was asked to enumerate more cells than its budget allows.
class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(const std::string& what_arg, double requested, double budget)
        : std::runtime_error(what_arg + " (requested " + std::to_string(requested) +
                             " cells, budget " + std::to_string(budget) + ")"),
          requested_(requested),
          budget_(budget) {}

    double requested() const noexcept { return requested_; }
    double budget() const noexcept { return budget_; }

private:
    double requested_;
    double budget_;
};

}  // namespace marls
