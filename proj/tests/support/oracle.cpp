#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vrpkit::oracle {

namespace {

constexpr double kTol = 1e-9;

// One route, simulated start to finish. Returns false on the first broken rule.
bool route_ok(const std::vector<int>& visits, int depot, const Instance& inst,
              const ConstraintSet& cs, const DistanceMatrix& dm) {
    if (visits.empty()) return false;

    // Load profile. Vehicles leave with everything the route will deliver.
    if (inst.demands) {
        double load = 0.0;
        for (int v : visits) {
            const double q = (*inst.demands)[v];
            if (q > 0) load += q;
        }
        if (cs.capacity_on && load > cs.capacity + kTol) return false;
        bool pickups_started = false;
        for (int v : visits) {
            const double q = (*inst.demands)[v];
            if (cs.backhaul_on) {
                if (q < 0) pickups_started = true;
                if (q > 0 && pickups_started) return false;
            }
            load -= q;
            if (cs.capacity_on && (load > cs.capacity + kTol || load < -kTol)) return false;
        }
    }

    // Distance profile, including the return leg when routes are closed.
    double total = 0.0;
    {
        int prev = depot;
        for (int v : visits) {
            const double d = dm.at(prev, v);
            if (std::isinf(d)) return false;
            total += d;
            prev = v;
        }
        if (!cs.open_route) {
            const double d = dm.at(prev, depot);
            if (std::isinf(d)) return false;
            total += d;
        }
        if (cs.distance_limit_on && total > cs.distance_limit + kTol) return false;
    }

    // Clock with waiting and service.
    if (cs.time_windows_on && inst.time_windows) {
        double t = (*inst.time_windows)[depot].first;
        int prev = depot;
        for (int v : visits) {
            t += dm.at(prev, v);
            const auto [e, l] = (*inst.time_windows)[v];
            if (t > l + kTol) return false;
            if (t < e) t = e;
            if (inst.is_station(v)) {
                if (cs.electric_on) {
                    // Recharge duration recomputed below in the fuel pass; here
                    // the clock needs the same amount, so recompute fuel inline.
                    double fuel = cs.fuel_capacity;
                    int p = depot;
                    for (int u : visits) {
                        fuel -= cs.fuel_consumption_rate * dm.at(p, u);
                        if (u == v) break;
                        if (inst.is_station(u)) fuel = cs.fuel_capacity;
                        p = u;
                    }
                    t += (cs.fuel_capacity - fuel) / cs.refuel_rate;
                }
            } else {
                t += inst.service_time(v);
            }
            prev = v;
        }
        if (!cs.open_route) {
            t += dm.at(prev, depot);
            if (t > (*inst.time_windows)[depot].second + kTol) return false;
        }
    }

    // Fuel profile with full recharge at stations.
    if (cs.electric_on) {
        double fuel = cs.fuel_capacity;
        int prev = depot;
        for (int v : visits) {
            fuel -= cs.fuel_consumption_rate * dm.at(prev, v);
            if (fuel < -kTol) return false;
            if (inst.is_station(v)) fuel = cs.fuel_capacity;
            prev = v;
        }
        if (!cs.open_route) {
            fuel -= cs.fuel_consumption_rate * dm.at(prev, depot);
            if (fuel < -kTol) return false;
        }
    }

    // Precedence inside the route.
    if (cs.precedence_on) {
        std::vector<int> position(inst.dimension + 1, -1);
        for (size_t i = 0; i < visits.size(); ++i) position[visits[i]] = static_cast<int>(i);
        for (const auto& [a, b] : cs.precedence) {
            if (position[a] >= 0 && position[b] >= 0 && position[a] > position[b])
                return false;
        }
    }
    return true;
}

} // namespace

bool feasible(const Solution& sol, const Instance& inst, const ConstraintSet& cs,
              const DistanceMatrix& dm) {
    std::vector<int> count(inst.dimension + 1, 0);
    std::vector<int> route_of(inst.dimension + 1, -1);
    for (size_t r = 0; r < sol.routes.size(); ++r) {
        const Route& route = sol.routes[r];
        bool depot_listed = false;
        for (int d : inst.depots) depot_listed = depot_listed || d == route.depot;
        if (!depot_listed) return false;
        for (int v : route.visits) {
            if (v < 1 || v > inst.dimension) return false;
            if (inst.is_depot(v)) return false;
            if (!inst.is_station(v)) {
                ++count[v];
                route_of[v] = static_cast<int>(r);
            }
        }
        if (!route_ok(route.visits, route.depot, inst, cs, dm)) return false;
    }
    for (int c : inst.customers())
        if (count[c] != 1) return false;
    if (cs.precedence_on) {
        for (const auto& [a, b] : cs.precedence)
            if (route_of[a] >= 0 && route_of[b] >= 0 && route_of[a] != route_of[b])
                return false;
    }
    return true;
}

namespace {

double route_len(const std::vector<int>& visits, int depot, const DistanceMatrix& dm,
                 bool open) {
    double total = 0.0;
    int prev = depot;
    for (int v : visits) {
        total += dm.at(prev, v);
        prev = v;
    }
    if (!open) total += dm.at(prev, depot);
    return total;
}

} // namespace

BruteResult brute_force_optimum(const Instance& inst, const ConstraintSet& cs,
                                const DistanceMatrix& dm) {
    BruteResult result;
    std::vector<int> customers = inst.customers();
    const int n = static_cast<int>(customers.size());
    if (n == 0 || n > 8) return result;
    std::sort(customers.begin(), customers.end());

    std::vector<int> perm = customers;
    do {
        for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
            Solution candidate;
            double total = 0.0;
            bool ok = true;
            size_t begin = 0;
            for (int i = 0; i < n && ok; ++i) {
                const bool cut = i == n - 1 || (mask >> i) & 1u;
                if (!cut) continue;
                std::vector<int> visits(perm.begin() + begin, perm.begin() + i + 1);
                begin = i + 1;
                int best_depot = 0;
                double best_cost = 0.0;
                for (int depot : inst.depots) {
                    if (!route_ok(visits, depot, inst, cs, dm)) continue;
                    const double c = route_len(visits, depot, dm, cs.open_route);
                    if (best_depot == 0 || c < best_cost) {
                        best_depot = depot;
                        best_cost = c;
                    }
                }
                if (best_depot == 0) {
                    ok = false;
                    break;
                }
                total += best_cost;
                candidate.routes.push_back({best_depot, std::move(visits)});
            }
            if (!ok) continue;
            if (cs.precedence_on && candidate.routes.size() > 1) {
                // Split precedence pairs across routes are ruled out here.
                std::vector<int> route_of(inst.dimension + 1, -1);
                for (size_t r = 0; r < candidate.routes.size(); ++r)
                    for (int v : candidate.routes[r].visits)
                        route_of[v] = static_cast<int>(r);
                bool split = false;
                for (const auto& [a, b] : cs.precedence)
                    if (route_of[a] >= 0 && route_of[b] >= 0 && route_of[a] != route_of[b])
                        split = true;
                if (split) continue;
            }
            if (!result.found || total < result.optimum) {
                result.found = true;
                result.optimum = total;
                candidate.cached_cost = total;
                result.best = std::move(candidate);
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return result;
}

} // namespace vrpkit::oracle
