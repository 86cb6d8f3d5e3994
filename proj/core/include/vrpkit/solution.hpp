#pragma once

#include <vector>

namespace vrpkit {

// One vehicle route: the depot it starts from (and returns to, in closed
// variants) plus the visited nodes in order. Visits hold customers and any
// station stops, never depots.
struct Route {
    int depot = 0;
    std::vector<int> visits;
    bool operator==(const Route&) const = default;
};

struct Solution {
    std::vector<Route> routes;
    double cached_cost = 0.0;
    bool operator==(const Solution& other) const { return routes == other.routes; }
};

} // namespace vrpkit
