#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vrpkit/instance.hpp"
#include "vrpkit/solution.hpp"

namespace vrpkit {

// Active constraint flags plus their bound parameters: the machine form of a
// variant. Built by classify(), or synthesized by the pipeline.
struct ConstraintSet {
    bool capacity_on = false;
    double capacity = 0.0;
    bool distance_limit_on = false;
    double distance_limit = 0.0;
    bool time_windows_on = false; // service times available, defaulting to 0
    bool open_route = false;
    bool multi_depot = false;
    bool backhaul_on = false; // strict: all deliveries before any pickup
    bool mixed_backhaul_on = false;
    bool electric_on = false;
    double fuel_capacity = 0.0;
    double fuel_consumption_rate = 0.0;
    double refuel_rate = 0.0;
    std::vector<int> stations;
    bool precedence_on = false;
    std::vector<std::pair<int, int>> precedence; // transitively closed (before, after)
    std::vector<std::vector<int>> predecessors;  // per node: nodes required before it
    bool asymmetric = false;

    bool flags_equal(const ConstraintSet& other) const {
        return capacity_on == other.capacity_on &&
               distance_limit_on == other.distance_limit_on &&
               time_windows_on == other.time_windows_on &&
               open_route == other.open_route && multi_depot == other.multi_depot &&
               backhaul_on == other.backhaul_on &&
               mixed_backhaul_on == other.mixed_backhaul_on &&
               electric_on == other.electric_on && precedence_on == other.precedence_on &&
               asymmetric == other.asymmetric;
    }
};

// Canonical letter code for a constraint set. Composite variants assemble as
// MD, E, O, C, "VRP", B|MB, L, TW; the classical asymmetric/precedence rows
// keep their published names (TSP, ATSP, ACVRP, SOP).
std::string variant_code(const ConstraintSet& cs);

struct VariantSignature {
    std::string code;
    ConstraintSet flags;
    std::string open_route_source; // "type", "name", "flag", or "" when closed
    std::string mixed_backhaul_source;
    std::vector<std::string> notes;
};

// Out-of-band facts the file format cannot carry (open routes, strict-vs-mixed
// backhaul). CLI flags land here and win over TYPE/NAME hints.
struct VariantHints {
    std::optional<bool> open_route;
    std::optional<bool> mixed_backhaul;
};

// Variant classification from field presence and sign patterns. The declared
// TYPE string never decides a flag that fields can decide; it only supplies
// the open/mixed hints that have no field of their own.
VariantSignature classify(const Instance& inst, const VariantHints& hints = {});

// Parses a variant code like "MDOCVRPMBLTW"; nullopt when the token is not a
// variant code.
struct CodeFlags {
    bool multi_depot = false, electric = false, open = false, capacity = false;
    bool backhaul = false, mixed_backhaul = false, distance_limit = false;
    bool time_windows = false, asymmetric = false, precedence = false;
};
std::optional<CodeFlags> parse_variant_code(const std::string& token);

enum class ConstraintKind {
    Capacity,
    DistanceLimit,
    TimeWindow,
    BackhaulOrder,
    Electric,
    Precedence,
    ForbiddenArc,
    Visit,
    Depot,
    Cost,
};
std::string to_string(ConstraintKind kind);

struct Violation {
    ConstraintKind kind;
    int route_index = -1; // -1 for solution-level violations
    int node = 0;
    std::string message;
};

struct VisitRecord {
    int node = 0;
    double arrival_time = 0.0;
    double departure_time = 0.0;
    double load_after = 0.0;
    double fuel_after = 0.0;
    double cumulative_distance = 0.0;
};

struct RouteTrace {
    std::vector<VisitRecord> visits; // includes the depot start and, when closed, the return
    bool feasible = true;
    std::optional<Violation> first_violation;
};

// Forward-simulates one route under every active constraint: load per the
// backhaul model, clock with waiting and service, distance against the limit,
// fuel drawdown with full recharge at stations, precedence order. Throws
// std::invalid_argument on malformed routes (empty); infeasibility is data.
RouteTrace check_route(const Route& route, const Instance& inst, const ConstraintSet& cs,
                       const DistanceMatrix& dm);

// Same simulation without building the trace; the solver's hot path.
bool route_feasible(const Route& route, const Instance& inst, const ConstraintSet& cs,
                    const DistanceMatrix& dm);

struct FeasibilityReport {
    bool feasible = true;
    std::vector<Violation> violations;
    std::string to_text() const;
};

// Per-route checks plus the global rules: every customer exactly once across
// all routes (depots and stations excluded), route depots drawn from the
// instance depot list, and precedence pairs not split across routes.
FeasibilityReport check_solution(const Solution& sol, const Instance& inst,
                                 const ConstraintSet& cs, const DistanceMatrix& dm);

std::vector<std::pair<int, int>> transitive_closure(
    const std::vector<std::pair<int, int>>& pairs, int dimension);

} // namespace vrpkit
