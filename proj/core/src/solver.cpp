#include "vrpkit/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vrpkit/errors.hpp"

namespace vrpkit {

namespace {

double route_cost(const Route& route, const DistanceMatrix& dm, bool open) {
    if (route.visits.empty()) return 0.0;
    double total = 0.0;
    int prev = route.depot;
    for (int v : route.visits) {
        total += dm.at(prev, v);
        prev = v;
    }
    if (!open) total += dm.at(prev, route.depot);
    return total;
}

// Depots ordered by distance to node, ties toward the lower id.
std::vector<int> depots_by_distance(const Instance& inst, const DistanceMatrix& dm, int node) {
    std::vector<int> depots = inst.depots;
    std::sort(depots.begin(), depots.end(), [&](int a, int b) {
        const double da = dm.at(a, node), db = dm.at(b, node);
        if (da != db) return da < db;
        return a < b;
    });
    return depots;
}

bool routes_has_customer(const Instance& inst, const Route& route) {
    for (int v : route.visits)
        if (!inst.is_station(v)) return true;
    return false;
}

void drop_empty_routes(Solution& sol, const Instance& inst) {
    std::erase_if(sol.routes,
                  [&](const Route& r) { return !routes_has_customer(inst, r); });
}

// Where a route's fuel profile first breaks: how many customer visits were
// completed (return counts one past the last customer), how much fuel the
// failing leg started with, and the insertion slot that splits that leg.
struct FuelBreak {
    size_t customers_done = 0;
    double fuel_before = 0.0;
    size_t split_slot = 0;
};

std::optional<FuelBreak> fuel_break(const Route& route, const Instance& inst,
                                    const RouteTrace& trace) {
    if (trace.feasible || !trace.first_violation ||
        trace.first_violation->kind != ConstraintKind::Electric)
        return std::nullopt;
    FuelBreak fb;
    // The violating record is the last one in the trace; the leg into it
    // started at the record before.
    const size_t k = trace.visits.size() - 1;
    fb.fuel_before = k >= 1 ? trace.visits[k - 1].fuel_after : 0.0;
    size_t done = 0;
    for (size_t i = 1; i < k; ++i)
        if (!inst.is_station(trace.visits[i].node)) ++done;
    const bool failed_on_return = k - 1 >= route.visits.size() +
                                              0u; // one record per visit plus depot start
    fb.customers_done = done + (failed_on_return ? 1 : 0);
    // Slot index of the failing destination within route.visits; the return
    // leg splits at the very end.
    fb.split_slot = failed_on_return ? route.visits.size() : k - 1;
    return fb;
}

// Inserts charging stops until the fuel profile works out, at most `budget`
// insertions. Each pass scans slots from the failing leg backwards and takes
// the cheapest station that either fixes the route or strictly improves the
// failure point (later leg, or more fuel entering the same leg).
bool repair_fuel(Route& route, const Instance& inst, const ConstraintSet& cs,
                 const DistanceMatrix& dm, int budget = 2) {
    if (cs.stations.empty()) return false;
    for (int attempt = 0; attempt < budget; ++attempt) {
        const RouteTrace trace = check_route(route, inst, cs, dm);
        if (trace.feasible) return true;
        const auto broken = fuel_break(route, inst, trace);
        if (!broken) return false;

        bool placed = false;
        for (size_t slot = broken->split_slot + 1; slot-- > 0 && !placed;) {
            int best_station = 0;
            double best_delta = 0.0;
            bool best_feasible = false;
            for (int st : cs.stations) {
                Route candidate = route;
                candidate.visits.insert(candidate.visits.begin() + slot, st);
                const RouteTrace t2 = check_route(candidate, inst, cs, dm);
                bool acceptable = t2.feasible;
                if (!acceptable) {
                    const auto b2 = fuel_break(candidate, inst, t2);
                    acceptable = b2 && (b2->customers_done > broken->customers_done ||
                                        (b2->customers_done == broken->customers_done &&
                                         b2->fuel_before > broken->fuel_before + 1e-9));
                }
                if (!acceptable) continue;
                const int prev = slot == 0 ? route.depot : route.visits[slot - 1];
                const int next = slot == route.visits.size()
                                     ? (cs.open_route ? -1 : route.depot)
                                     : route.visits[slot];
                const double delta = next < 0 ? dm.at(prev, st)
                                              : dm.at(prev, st) + dm.at(st, next) -
                                                    dm.at(prev, next);
                if (best_station == 0 || (t2.feasible && !best_feasible) ||
                    (t2.feasible == best_feasible && delta < best_delta)) {
                    best_station = st;
                    best_delta = delta;
                    best_feasible = t2.feasible;
                }
            }
            if (best_station != 0) {
                route.visits.insert(route.visits.begin() + slot, best_station);
                placed = true;
            }
        }
        if (!placed) return false;
    }
    return route_feasible(route, inst, cs, dm);
}

// Feasible insertion slots for `node` given precedence pairs already closed
// transitively: after its last in-route predecessor, before its first
// in-route successor.
std::pair<size_t, size_t> precedence_window(const Route& route, const ConstraintSet& cs,
                                            int node) {
    size_t lo = 0, hi = route.visits.size();
    if (!cs.precedence_on) return {lo, hi};
    std::vector<char> is_pred(cs.predecessors.size(), 0);
    for (int p : cs.predecessors[node]) is_pred[p] = 1;
    for (size_t idx = 0; idx < route.visits.size(); ++idx) {
        const int v = route.visits[idx];
        if (is_pred[v]) lo = idx + 1;
        for (int p : cs.predecessors[v])
            if (p == node) {
                hi = std::min(hi, idx);
                break;
            }
    }
    return {lo, hi};
}

struct InsertionCandidate {
    double delta;
    size_t route;
    size_t slot;
};

} // namespace

double cost(const Solution& sol, const DistanceMatrix& dm, const ConstraintSet& cs) {
    double total = 0.0;
    for (const Route& r : sol.routes) total += route_cost(r, dm, cs.open_route);
    return total;
}

double temperature(long iterations, long step) {
    if (step < 1 || step > iterations)
        throw std::out_of_range("temperature: step " + std::to_string(step) +
                                " outside 1.." + std::to_string(iterations));
    return static_cast<double>(iterations - step + 1) / 10.0;
}

bool accept(double e_new, double e_current, double temp, Rng& rng) {
    if (e_new <= e_current) return true;
    const double p = std::exp(-(e_new - e_current) / temp);
    return rng.next_double() < p;
}

Solution initial_solution(const Instance& inst, const ConstraintSet& cs,
                          const DistanceMatrix& dm, Rng& /*rng*/) {
    Solution sol;
    std::vector<int> unserved = inst.customers();

    auto open_route_for = [&](int customer) -> Route {
        for (int depot : depots_by_distance(inst, dm, customer)) {
            Route route{depot, {customer}};
            if (route_feasible(route, inst, cs, dm)) return route;
            if (cs.electric_on && repair_fuel(route, inst, cs, dm)) return route;
        }
        RouteTrace trace =
            check_route(Route{depots_by_distance(inst, dm, customer)[0], {customer}},
                        inst, cs, dm);
        const std::string why =
            trace.first_violation ? to_string(trace.first_violation->kind) : "unknown";
        throw ConstructionError("customer " + std::to_string(customer) +
                                    " cannot be served alone (" + why + ")",
                                customer);
    };

    while (!unserved.empty()) {
        // Seed a fresh route with the unserved customer closest to any depot.
        int seed = unserved[0];
        double seed_dist = 0.0;
        bool first = true;
        for (int u : unserved) {
            const double d = dm.at(depots_by_distance(inst, dm, u)[0], u);
            if (first || d < seed_dist || (d == seed_dist && u < seed)) {
                seed = u;
                seed_dist = d;
                first = false;
            }
        }
        Route route = open_route_for(seed);
        std::erase(unserved, seed);

        bool extended = true;
        while (extended && !unserved.empty()) {
            extended = false;
            const int tail = route.visits.back();
            std::vector<int> order = unserved;
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const double da = dm.at(tail, a), db = dm.at(tail, b);
                if (da != db) return da < db;
                return a < b;
            });
            for (int u : order) {
                Route extended_route = route;
                extended_route.visits.push_back(u);
                bool ok = route_feasible(extended_route, inst, cs, dm);
                if (!ok && cs.electric_on) {
                    extended_route = route;
                    extended_route.visits.push_back(u);
                    ok = repair_fuel(extended_route, inst, cs, dm);
                }
                if (ok) {
                    route = std::move(extended_route);
                    std::erase(unserved, u);
                    extended = true;
                    break;
                }
            }
        }
        sol.routes.push_back(std::move(route));
    }

    FeasibilityReport report = check_solution(sol, inst, cs, dm);
    if (!report.feasible)
        throw SolverDefect("greedy construction produced an infeasible solution:\n" +
                           report.to_text());
    sol.cached_cost = cost(sol, dm, cs);
    return sol;
}

std::pair<RemovalSet, Solution> destroy(const Solution& sol, const Instance& inst,
                                        const ConstraintSet& cs, const DistanceMatrix& dm,
                                        double ratio, int max_subsequence, Rng& rng) {
    Solution residual = sol;
    RemovalSet removed;

    std::vector<int> customers;
    std::vector<int> route_of(inst.dimension + 1, -1);
    for (size_t r = 0; r < residual.routes.size(); ++r)
        for (int v : residual.routes[r].visits)
            if (!inst.is_station(v)) {
                customers.push_back(v);
                route_of[v] = static_cast<int>(r);
            }
    if (customers.empty()) return {removed, residual};
    std::sort(customers.begin(), customers.end());

    const long n_rm = std::max<long>(
        1, static_cast<long>(std::floor(static_cast<double>(customers.size()) * ratio)));
    const int center = customers[rng.next_index(static_cast<int>(customers.size()))];

    std::vector<int> order = customers;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = dm.at(center, a), db = dm.at(center, b);
        if (da != db) return da < db;
        return a < b;
    });

    std::vector<char> destroyed(residual.routes.size(), 0);
    std::vector<char> gone(inst.dimension + 1, 0);
    for (int u : order) {
        if (static_cast<long>(removed.customers.size()) >= n_rm) break;
        if (gone[u]) continue;
        const int r = route_of[u];
        if (destroyed[r]) continue;
        auto& visits = residual.routes[r].visits;
        const auto it = std::find(visits.begin(), visits.end(), u);
        const long pos = it - visits.begin();
        const long len = static_cast<long>(visits.size());
        // The cut length is capped by the route and the configured maximum
        // only; since the target check precedes each removal, the final count
        // still stays within max_subsequence - 1 of the target.
        const long cap = std::min(len, static_cast<long>(max_subsequence));
        const long qlen = static_cast<long>(rng.next_int(1, static_cast<std::uint64_t>(cap)));
        const long lo = std::max<long>(0, pos - (qlen - 1));
        const long hi = std::min(pos, len - qlen);
        const long start = static_cast<long>(
            rng.next_int(static_cast<std::uint64_t>(lo), static_cast<std::uint64_t>(hi)));
        for (long k = start; k < start + qlen; ++k) {
            const int v = visits[k];
            gone[v] = 1;
            if (!inst.is_station(v)) removed.customers.push_back(v);
        }
        visits.erase(visits.begin() + start, visits.begin() + start + qlen);
        destroyed[r] = 1;
    }

    drop_empty_routes(residual, inst);
    residual.cached_cost = cost(residual, dm, cs);
    return {std::move(removed), std::move(residual)};
}

Solution insert(Solution partial, const RemovalSet& removed, const Instance& inst,
                const ConstraintSet& cs, const DistanceMatrix& dm, Rng& rng) {
    std::vector<int> order = removed.customers;
    rng.shuffle(order);

    // Route aggregates for the cheap screens.
    auto delivery_load = [&](const Route& r) {
        double s = 0.0;
        for (int v : r.visits) s += std::max(inst.demand(v), 0.0);
        return s;
    };
    auto pickup_load = [&](const Route& r) {
        double s = 0.0;
        for (int v : r.visits) s += std::max(-inst.demand(v), 0.0);
        return s;
    };

    // Fleet size is elastic for capacitated variants, so opening a fresh
    // route competes on delta like any other position. Tour variants (no
    // capacity) never split: a fresh route only appears as the fallback.
    constexpr size_t kFreshRoute = SIZE_MAX;

    for (int u : order) {
        const double dem = inst.demand(u);
        std::vector<InsertionCandidate> candidates;
        if (cs.capacity_on && !partial.routes.empty()) {
            const int depot = depots_by_distance(inst, dm, u).front();
            const double delta =
                cs.open_route ? dm.at(depot, u) : dm.at(depot, u) + dm.at(u, depot);
            if (!std::isinf(delta) &&
                !(cs.distance_limit_on && delta > cs.distance_limit + 1e-9))
                candidates.push_back({delta, kFreshRoute, 0});
        }
        for (size_t r = 0; r < partial.routes.size(); ++r) {
            const Route& route = partial.routes[r];
            if (cs.capacity_on) {
                if (dem > 0 && delivery_load(route) + dem > cs.capacity + 1e-9) continue;
                if (dem < 0 && pickup_load(route) - dem > cs.capacity + 1e-9) continue;
            }
            const auto [lo, hi] = precedence_window(route, cs, u);
            const double base = route_cost(route, dm, cs.open_route);
            for (size_t slot = lo; slot <= hi; ++slot) {
                const int prev = slot == 0 ? route.depot : route.visits[slot - 1];
                const bool at_end = slot == route.visits.size();
                double delta;
                if (at_end && cs.open_route) {
                    delta = dm.at(prev, u);
                } else {
                    const int next = at_end ? route.depot : route.visits[slot];
                    delta = dm.at(prev, u) + dm.at(u, next) - dm.at(prev, next);
                }
                if (std::isinf(delta) || std::isnan(delta)) continue;
                if (cs.distance_limit_on && base + delta > cs.distance_limit + 1e-9)
                    continue;
                candidates.push_back({delta, r, slot});
            }
        }
        std::sort(candidates.begin(), candidates.end(),
                  [](const InsertionCandidate& a, const InsertionCandidate& b) {
                      if (a.delta != b.delta) return a.delta < b.delta;
                      if (a.route != b.route) return a.route < b.route;
                      return a.slot < b.slot;
                  });

        bool placed = false;
        int fuel_repairs_left = cs.electric_on ? 2 : 0;
        for (const auto& cand : candidates) {
            if (cand.route == kFreshRoute) {
                for (int depot : depots_by_distance(inst, dm, u)) {
                    Route fresh{depot, {u}};
                    if (route_feasible(fresh, inst, cs, dm) ||
                        (cs.electric_on && repair_fuel(fresh, inst, cs, dm))) {
                        partial.routes.push_back(std::move(fresh));
                        placed = true;
                        break;
                    }
                }
                if (placed) break;
                continue;
            }
            Route trial = partial.routes[cand.route];
            trial.visits.insert(trial.visits.begin() + cand.slot, u);
            if (route_feasible(trial, inst, cs, dm)) {
                partial.routes[cand.route] = std::move(trial);
                placed = true;
                break;
            }
            if (fuel_repairs_left > 0) {
                Route repaired = partial.routes[cand.route];
                repaired.visits.insert(repaired.visits.begin() + cand.slot, u);
                --fuel_repairs_left;
                if (repair_fuel(repaired, inst, cs, dm)) {
                    partial.routes[cand.route] = std::move(repaired);
                    placed = true;
                    break;
                }
            }
        }

        if (!placed) {
            bool opened = false;
            for (int depot : depots_by_distance(inst, dm, u)) {
                Route fresh{depot, {u}};
                if (route_feasible(fresh, inst, cs, dm) ||
                    (cs.electric_on && repair_fuel(fresh, inst, cs, dm))) {
                    partial.routes.push_back(std::move(fresh));
                    opened = true;
                    break;
                }
            }
            if (!opened)
                throw ConstructionError("customer " + std::to_string(u) +
                                            " cannot be reinserted anywhere",
                                        u);
        }
    }

    drop_empty_routes(partial, inst);
    FeasibilityReport report = check_solution(partial, inst, cs, dm);
    if (!report.feasible)
        throw SolverDefect("insertion produced an infeasible solution:\n" +
                           report.to_text());
    partial.cached_cost = cost(partial, dm, cs);
    return partial;
}

void canonicalize_depots(Solution& sol, const Instance& inst, const ConstraintSet& cs,
                         const DistanceMatrix& dm) {
    if (inst.depots.size() < 2) return;
    for (Route& route : sol.routes) {
        int best = route.depot;
        double best_cost = route_cost(route, dm, cs.open_route);
        for (int depot : inst.depots) {
            if (depot == route.depot) continue;
            Route candidate = route;
            candidate.depot = depot;
            const double c = route_cost(candidate, dm, cs.open_route);
            if ((c < best_cost || (c == best_cost && depot < best)) &&
                route_feasible(candidate, inst, cs, dm)) {
                best = depot;
                best_cost = c;
            }
        }
        route.depot = best;
    }
    sol.cached_cost = cost(sol, dm, cs);
}

std::pair<Solution, SearchStats> solve(const Instance& inst, const ConstraintSet& cs,
                                       const DistanceMatrix& dm, const SolverConfig& cfg) {
    if (cfg.destroy_ratio <= 0.0 || cfg.destroy_ratio >= 1.0)
        throw ConfigError("destroy ratio must lie in (0, 1)");
    if (cfg.iterations < 0) throw ConfigError("iterations must be >= 0");

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    SearchState state;
    state.rng = Rng(cfg.seed);
    SearchStats stats;
    state.current = initial_solution(inst, cs, dm, state.rng);
    state.best = state.current;
    stats.best_trajectory.reserve(static_cast<size_t>(cfg.iterations));

    // A removal target below 2 confines each step to a single route, which
    // leaves cross-route exchanges unreachable on small instances; the search
    // then fixes at its first local optimum. Keep the per-step target at two
    // customers minimum (the floor-to-one rule already extends the ratio rule
    // in the same direction).
    double ratio = cfg.destroy_ratio;
    const size_t customer_count = inst.customers().size();
    if (customer_count >= 2) ratio = std::min(0.99, std::max(ratio, 2.5 / customer_count));

    for (state.step = 1; state.step <= cfg.iterations; ++state.step) {
        if (cfg.time_limit_s && elapsed() > *cfg.time_limit_s) {
            stats.truncated = true;
            break;
        }
        auto [removed, partial] =
            destroy(state.current, inst, cs, dm, ratio, cfg.max_subsequence, state.rng);
        Solution candidate = insert(std::move(partial), removed, inst, cs, dm, state.rng);

        FeasibilityReport report = check_solution(candidate, inst, cs, dm);
        if (!report.feasible)
            throw SolverDefect("step " + std::to_string(state.step) +
                               " produced an infeasible candidate:\n" + report.to_text());
        candidate.cached_cost = cost(candidate, dm, cs);

        const double temp = temperature(cfg.iterations, state.step);
        if (accept(candidate.cached_cost, state.current.cached_cost, temp, state.rng)) {
            state.current = std::move(candidate);
            ++stats.accepted;
        }
        if (state.current.cached_cost < state.best.cached_cost) state.best = state.current;
        stats.best_trajectory.push_back(state.best.cached_cost);
        ++stats.steps;
    }

    canonicalize_depots(state.best, inst, cs, dm);
    stats.best_cost = state.best.cached_cost;
    stats.wall_time_s = elapsed();
    return {std::move(state.best), std::move(stats)};
}

std::string SearchStats::to_text() const {
    std::ostringstream out;
    out << "steps " << steps << "\n";
    out << "accepted " << accepted << "\n";
    out << "best_cost " << format_number(best_cost) << "\n";
    out << "wall_time_s " << format_number(wall_time_s) << "\n";
    if (truncated) out << "truncated 1\n";
    return out.str();
}

} // namespace vrpkit
