#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vrpkit/constraints.hpp"
#include "vrpkit/instance.hpp"
#include "vrpkit/solution.hpp"

namespace vrpkit {

// CVRPLIB-style solution text: one "Route #k: v1 v2 ..." line per route
// (depots omitted, station stops included), then "Cost <value>".
std::string to_sol_text(const Solution& sol, double cost_value);

struct ParsedSol {
    std::vector<std::vector<int>> routes;
    std::optional<double> cost;
};

// Throws ParseError on malformed text.
ParsedSol parse_sol_text(const std::string& text);

// Rebuilds Route objects from bare visit lists by assigning each route the
// cost-minimal feasible depot (the same canonical choice the solver emits).
Solution attach_depots(const ParsedSol& parsed, const Instance& inst,
                       const ConstraintSet& cs, const DistanceMatrix& dm);

} // namespace vrpkit
