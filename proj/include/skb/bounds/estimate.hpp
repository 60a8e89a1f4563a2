#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "skb/optimize.hpp"

namespace skb {

enum class Direction { exact, upper_estimate, lower_bound };

inline const char* direction_name(Direction d) {
    switch (d) {
        case Direction::exact: return "exact";
        case Direction::upper_estimate: return "upper-estimate-of-infimum";
        case Direction::lower_bound: return "lower-bound";
    }
    return "?";
}

struct BoundEstimate {
    std::string name;
    double value = 0;
    Direction direction = Direction::exact;
    std::optional<OptimizationOutcome> optimizer;
    std::map<std::string, double> parameters;
    // grid-oracle interval [lower, upper] when one was run
    std::optional<std::pair<double, double>> bracket;
    std::string witness;
};

namespace detail {

// Positional labels of a tripartite (A, B, E) or bipartite (A, B) state.
inline const std::string& label_at(const DensityState& rho, std::size_t i) { return rho.layout().labels().at(i); }

inline void require_parts(const DensityState& rho, std::size_t n, const char* what) {
    if (rho.layout().size() != n)
        throw usage_error(std::string(what) + ": expected " + std::to_string(n) + " subsystems, got " +
                          std::to_string(rho.layout().size()));
}

inline void require_parts(const ClassicalDistribution& p, std::size_t n, const char* what) {
    if (p.layout().size() != n)
        throw usage_error(std::string(what) + ": expected " + std::to_string(n) + " registers, got " +
                          std::to_string(p.layout().size()));
}

}  // namespace detail

}  // namespace skb
