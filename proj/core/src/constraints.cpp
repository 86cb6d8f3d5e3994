#include "vrpkit/constraints.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace vrpkit {

namespace {
constexpr double kEps = 1e-9;

double slack(double scale) { return kEps * std::max(1.0, std::fabs(scale)); }
} // namespace

std::string to_string(ConstraintKind kind) {
    switch (kind) {
        case ConstraintKind::Capacity: return "Capacity";
        case ConstraintKind::DistanceLimit: return "DistanceLimit";
        case ConstraintKind::TimeWindow: return "TimeWindow";
        case ConstraintKind::BackhaulOrder: return "BackhaulOrder";
        case ConstraintKind::Electric: return "Electric";
        case ConstraintKind::Precedence: return "Precedence";
        case ConstraintKind::ForbiddenArc: return "ForbiddenArc";
        case ConstraintKind::Visit: return "Visit";
        case ConstraintKind::Depot: return "Depot";
        case ConstraintKind::Cost: return "Cost";
    }
    return "?";
}

std::string variant_code(const ConstraintSet& cs) {
    if (cs.precedence_on) return "SOP";
    const bool routing = cs.capacity_on || cs.distance_limit_on || cs.time_windows_on ||
                         cs.open_route || cs.multi_depot || cs.backhaul_on ||
                         cs.mixed_backhaul_on || cs.electric_on;
    if (!routing) return cs.asymmetric ? "ATSP" : "TSP";
    const bool capacity_only = cs.capacity_on && !cs.distance_limit_on &&
                               !cs.time_windows_on && !cs.open_route && !cs.multi_depot &&
                               !cs.backhaul_on && !cs.mixed_backhaul_on && !cs.electric_on;
    if (cs.asymmetric && capacity_only) return "ACVRP";
    std::string code;
    if (cs.multi_depot) code += "MD";
    if (cs.electric_on) code += "E";
    if (cs.open_route) code += "O";
    if (cs.capacity_on) code += "C";
    code += "VRP";
    if (cs.backhaul_on) code += "B";
    if (cs.mixed_backhaul_on) code += "MB";
    if (cs.distance_limit_on) code += "L";
    if (cs.time_windows_on) code += "TW";
    return code;
}

std::optional<CodeFlags> parse_variant_code(const std::string& token) {
    if (token == "TSP") return CodeFlags{};
    if (token == "ATSP") {
        CodeFlags f;
        f.asymmetric = true;
        return f;
    }
    if (token == "ACVRP") {
        CodeFlags f;
        f.asymmetric = true;
        f.capacity = true;
        return f;
    }
    if (token == "SOP") {
        CodeFlags f;
        f.precedence = true;
        return f;
    }
    CodeFlags f;
    size_t i = 0;
    auto eat = [&](const char* lit) {
        const size_t n = std::string_view(lit).size();
        if (token.compare(i, n, lit) == 0) {
            i += n;
            return true;
        }
        return false;
    };
    f.multi_depot = eat("MD");
    f.electric = eat("E");
    f.open = eat("O");
    f.capacity = eat("C");
    if (!eat("VRP")) return std::nullopt;
    if (eat("MB"))
        f.mixed_backhaul = true;
    else if (eat("B"))
        f.backhaul = true;
    f.distance_limit = eat("L");
    f.time_windows = eat("TW");
    if (i != token.size()) return std::nullopt;
    return f;
}

std::vector<std::pair<int, int>> transitive_closure(
    const std::vector<std::pair<int, int>>& pairs, int dimension) {
    std::vector<std::vector<int>> succ(dimension + 1);
    for (const auto& [a, b] : pairs) succ[a].push_back(b);
    std::vector<std::pair<int, int>> out;
    std::vector<char> reached(dimension + 1);
    for (int a = 1; a <= dimension; ++a) {
        if (succ[a].empty()) continue;
        std::fill(reached.begin(), reached.end(), 0);
        std::vector<int> stack(succ[a]);
        while (!stack.empty()) {
            const int b = stack.back();
            stack.pop_back();
            if (reached[b]) continue;
            reached[b] = 1;
            for (int c : succ[b]) stack.push_back(c);
        }
        for (int b = 1; b <= dimension; ++b)
            if (reached[b] && b != a) out.emplace_back(a, b);
    }
    return out;
}

namespace {

// Declared-type / name hints for the flags VRPLIB fields cannot carry.
struct TextHints {
    std::optional<bool> open;
    std::optional<bool> mixed;
    std::string source;
};

TextHints hints_from_text(const Instance& inst) {
    auto try_token = [](const std::string& tok) -> std::optional<CodeFlags> {
        if (tok.empty()) return std::nullopt;
        return parse_variant_code(tok);
    };
    if (auto f = try_token(inst.declared_type))
        return {f->open, f->mixed_backhaul, "type"};
    // Scan NAME for an embedded variant token like "OCVRPBLTW_n50_1".
    std::string tok;
    for (char c : inst.name + "\n") {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            tok.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        } else {
            if (auto f = try_token(tok)) return {f->open, f->mixed_backhaul, "name"};
            tok.clear();
        }
    }
    return {};
}

bool explicit_symmetric(const SquareMatrix& m) {
    for (int i = 1; i <= m.size(); ++i)
        for (int j = i + 1; j <= m.size(); ++j)
            if (m.at(i, j) != m.at(j, i)) return false;
    return true;
}

} // namespace

VariantSignature classify(const Instance& inst, const VariantHints& hints) {
    VariantSignature sig;
    ConstraintSet& cs = sig.flags;

    if (inst.capacity && inst.demands) {
        cs.capacity_on = true;
        cs.capacity = *inst.capacity;
    } else if (inst.capacity) {
        sig.notes.push_back("CAPACITY present without DEMAND_SECTION; capacity constraint off");
    } else if (inst.demands) {
        sig.notes.push_back("DEMAND_SECTION present without CAPACITY; capacity constraint off");
    }
    if (inst.distance_limit) {
        cs.distance_limit_on = true;
        cs.distance_limit = *inst.distance_limit;
    }
    if (inst.time_windows) cs.time_windows_on = true;
    cs.multi_depot = inst.depots.size() > 1;

    const bool any_energy = inst.fuel_capacity || inst.fuel_consumption_rate ||
                            inst.refuel_rate || inst.stations;
    if (inst.fuel_capacity && inst.fuel_consumption_rate && inst.refuel_rate &&
        inst.stations && !inst.stations->empty()) {
        cs.electric_on = true;
        cs.fuel_capacity = *inst.fuel_capacity;
        cs.fuel_consumption_rate = *inst.fuel_consumption_rate;
        cs.refuel_rate = *inst.refuel_rate;
        cs.stations = *inst.stations;
    } else if (any_energy) {
        sig.notes.push_back("incomplete electric fields (need FUEL_CAPACITY, "
                            "FUEL_CONSUMPTION_RATE, REFUEL_RATE, STATION_SECTION); "
                            "electric constraint off");
    }

    const TextHints text = hints_from_text(inst);

    bool has_pickup = false;
    if (inst.demands)
        for (int i = 1; i <= inst.dimension; ++i)
            if ((*inst.demands)[i] < 0) has_pickup = true;
    if (has_pickup) {
        bool mixed;
        if (hints.mixed_backhaul) {
            mixed = *hints.mixed_backhaul;
            sig.mixed_backhaul_source = "flag";
        } else if (text.mixed && *text.mixed) {
            mixed = true;
            sig.mixed_backhaul_source = text.source;
        } else if (text.mixed) {
            mixed = false;
            sig.mixed_backhaul_source = text.source;
        } else {
            mixed = false;
            sig.notes.push_back("negative demands with no strict/mixed hint; "
                                "defaulting to strict backhaul (B)");
        }
        cs.backhaul_on = !mixed;
        cs.mixed_backhaul_on = mixed;
    }

    if (hints.open_route) {
        cs.open_route = *hints.open_route;
        sig.open_route_source = "flag";
    } else if (text.open) {
        cs.open_route = *text.open;
        sig.open_route_source = cs.open_route ? text.source : "";
    }

    if (inst.explicit_weights) cs.asymmetric = !explicit_symmetric(*inst.explicit_weights);

    if (!inst.precedence.empty()) {
        cs.precedence_on = true;
        cs.precedence = transitive_closure(inst.precedence, inst.dimension);
        cs.predecessors.assign(inst.dimension + 1, {});
        for (const auto& [a, b] : cs.precedence) cs.predecessors[b].push_back(a);
    }

    sig.code = variant_code(cs);
    return sig;
}

namespace {

// Shared route simulation. When trace is non-null every visit record is kept;
// otherwise the walk stops at the first violation.
bool simulate_route(const Route& route, const Instance& inst, const ConstraintSet& cs,
                    const DistanceMatrix& dm, RouteTrace* trace) {
    if (route.visits.empty()) throw std::invalid_argument("empty route");

    std::optional<Violation> violation;
    auto violate = [&](ConstraintKind kind, int node, std::string msg) {
        if (!violation) violation = Violation{kind, -1, node, std::move(msg)};
    };

    double load = 0.0;
    if (inst.demands)
        for (int v : route.visits) load += std::max(inst.demand(v), 0.0);

    double clock = 0.0;
    if (cs.time_windows_on && inst.time_windows)
        clock = (*inst.time_windows)[route.depot].first;
    double fuel = cs.fuel_capacity;
    double dist = 0.0;
    // Over-capacity deliveries are attributed to the visit where the running
    // delivery total crosses the capacity, not to the depot departure.
    double delivery_total = 0.0;

    if (trace) trace->visits.push_back({route.depot, clock, clock, load, fuel, 0.0});

    // Within-route precedence bookkeeping.
    std::vector<char> in_route, done;
    if (cs.precedence_on) {
        in_route.assign(inst.dimension + 1, 0);
        done.assign(inst.dimension + 1, 0);
        for (int v : route.visits) in_route[v] = 1;
    }

    bool pickup_seen = false;
    int prev = route.depot;
    const size_t leg_count = route.visits.size() + (cs.open_route ? 0 : 1);
    for (size_t leg = 0; leg < leg_count && !violation; ++leg) {
        const bool returning = leg == route.visits.size();
        const int node = returning ? route.depot : route.visits[leg];

        const double d = dm.at(prev, node);
        if (std::isinf(d)) {
            violate(ConstraintKind::ForbiddenArc, node,
                    "arc " + std::to_string(prev) + "->" + std::to_string(node) +
                        " is forbidden");
            break;
        }
        dist += d;
        if (cs.distance_limit_on && dist > cs.distance_limit + slack(cs.distance_limit))
            violate(ConstraintKind::DistanceLimit, node,
                    "distance " + format_number(dist) + " exceeds limit " +
                        format_number(cs.distance_limit));

        if (cs.electric_on) {
            fuel -= cs.fuel_consumption_rate * d;
            if (fuel < -slack(cs.fuel_capacity))
                violate(ConstraintKind::Electric, node,
                        "fuel exhausted " + format_number(-fuel) + " short on arc " +
                            std::to_string(prev) + "->" + std::to_string(node));
        }

        const double arrival = clock + d;
        double begin = arrival;
        if (cs.time_windows_on && inst.time_windows) {
            const auto [earliest, latest] = (*inst.time_windows)[node];
            if (returning) {
                // Depot latest bounds route completion; no waiting on return.
                if (arrival > latest + slack(latest))
                    violate(ConstraintKind::TimeWindow, node,
                            "return at " + format_number(arrival) + " after depot latest " +
                                format_number(latest));
            } else {
                if (arrival < earliest) begin = earliest; // wait
                if (arrival > latest + slack(latest))
                    violate(ConstraintKind::TimeWindow, node,
                            "arrival " + format_number(arrival) + " after latest " +
                                format_number(latest));
            }
        }

        double departure = begin;
        if (!returning) {
            if (inst.is_depot(node)) {
                violate(ConstraintKind::Depot, node, "depot appears mid-route");
            } else if (inst.is_station(node)) {
                if (cs.electric_on) {
                    const double recharge = (cs.fuel_capacity - fuel) / cs.refuel_rate;
                    departure = begin + recharge;
                    fuel = cs.fuel_capacity;
                }
            } else {
                const double dem = inst.demand(node);
                if (cs.backhaul_on) {
                    if (dem > 0 && pickup_seen)
                        violate(ConstraintKind::BackhaulOrder, node,
                                "delivery after a pickup on a strict-backhaul route");
                    if (dem < 0) pickup_seen = true;
                }
                load -= dem;
                if (dem > 0) delivery_total += dem;
                if (cs.capacity_on) {
                    if (delivery_total > cs.capacity + slack(cs.capacity))
                        violate(ConstraintKind::Capacity, node,
                                "route deliveries reach " + format_number(delivery_total) +
                                    ", capacity is " + format_number(cs.capacity));
                    else if (load > cs.capacity + slack(cs.capacity))
                        violate(ConstraintKind::Capacity, node,
                                "load " + format_number(load) + " exceeds capacity " +
                                    format_number(cs.capacity));
                    else if (load < -slack(cs.capacity))
                        violate(ConstraintKind::Capacity, node, "load went negative");
                }
                if (cs.precedence_on) {
                    for (int before : cs.predecessors[node])
                        if (in_route[before] && !done[before]) {
                            violate(ConstraintKind::Precedence, node,
                                    std::to_string(before) + " must be visited before " +
                                        std::to_string(node));
                            break;
                        }
                    done[node] = 1;
                }
                departure = begin + inst.service_time(node);
            }
        }

        if (trace) trace->visits.push_back({node, arrival, departure, load, fuel, dist});
        clock = departure;
        prev = node;
    }

    if (trace && violation) {
        trace->feasible = false;
        trace->first_violation = violation;
    }
    return !violation.has_value();
}

} // namespace

RouteTrace check_route(const Route& route, const Instance& inst, const ConstraintSet& cs,
                       const DistanceMatrix& dm) {
    RouteTrace trace;
    trace.feasible = simulate_route(route, inst, cs, dm, &trace);
    return trace;
}

bool route_feasible(const Route& route, const Instance& inst, const ConstraintSet& cs,
                    const DistanceMatrix& dm) {
    return simulate_route(route, inst, cs, dm, nullptr);
}

std::string FeasibilityReport::to_text() const {
    std::ostringstream out;
    if (feasible) {
        out << "feasible\n";
        return out.str();
    }
    for (const auto& v : violations) {
        out << to_string(v.kind) << " | route " << v.route_index << " | node " << v.node
            << " | " << v.message << "\n";
    }
    return out.str();
}

FeasibilityReport check_solution(const Solution& sol, const Instance& inst,
                                 const ConstraintSet& cs, const DistanceMatrix& dm) {
    FeasibilityReport report;
    auto add = [&](ConstraintKind kind, int route_index, int node, std::string msg) {
        report.violations.push_back({kind, route_index, node, std::move(msg)});
    };

    std::vector<int> seen_count(inst.dimension + 1, 0);
    std::vector<int> route_of(inst.dimension + 1, -1);

    for (size_t r = 0; r < sol.routes.size(); ++r) {
        const Route& route = sol.routes[r];
        const int ri = static_cast<int>(r);
        if (route.visits.empty()) {
            add(ConstraintKind::Visit, ri, 0, "empty route");
            continue;
        }
        if (!inst.is_depot(route.depot)) {
            add(ConstraintKind::Depot, ri, route.depot,
                "route starts at node " + std::to_string(route.depot) +
                    " which is not a depot");
            continue;
        }
        bool ids_ok = true;
        for (int v : route.visits) {
            if (v < 1 || v > inst.dimension) {
                add(ConstraintKind::Visit, ri, v, "unknown node id");
                ids_ok = false;
                continue;
            }
            if (!inst.is_depot(v) && !inst.is_station(v)) {
                ++seen_count[v];
                route_of[v] = ri;
            }
        }
        if (!ids_ok) continue;
        RouteTrace trace = check_route(route, inst, cs, dm);
        if (!trace.feasible && trace.first_violation) {
            Violation v = *trace.first_violation;
            v.route_index = ri;
            report.violations.push_back(std::move(v));
        }
    }

    for (int c : inst.customers()) {
        if (seen_count[c] == 0)
            add(ConstraintKind::Visit, -1, c, "customer " + std::to_string(c) + " missing");
        else if (seen_count[c] > 1)
            add(ConstraintKind::Visit, -1, c,
                "customer " + std::to_string(c) + " visited " +
                    std::to_string(seen_count[c]) + " times");
    }

    if (cs.precedence_on) {
        for (const auto& [a, b] : cs.precedence) {
            if (route_of[a] >= 0 && route_of[b] >= 0 && route_of[a] != route_of[b])
                add(ConstraintKind::Precedence, route_of[b], b,
                    std::to_string(a) + " and " + std::to_string(b) +
                        " split across routes but ordered");
        }
    }

    report.feasible = report.violations.empty();
    return report;
}

} // namespace vrpkit
