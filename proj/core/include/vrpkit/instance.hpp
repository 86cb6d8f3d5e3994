#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vrpkit {

// Arc cost used for forbidden arcs.
inline constexpr double kForbiddenArc = std::numeric_limits<double>::infinity();

enum class Rounding { None, NearestInteger };

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

// Dense (dimension x dimension) matrix indexed by 1-based node ids.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(int n, double init = 0.0)
        : n_(n), values_(static_cast<size_t>(n + 1) * (n + 1), init) {}

    double& at(int i, int j) { return values_[static_cast<size_t>(i) * (n_ + 1) + j]; }
    double at(int i, int j) const { return values_[static_cast<size_t>(i) * (n_ + 1) + j]; }
    int size() const { return n_; }
    bool empty() const { return n_ == 0; }
    bool operator==(const SquareMatrix&) const = default;

private:
    int n_ = 0;
    std::vector<double> values_;
};

// One VRPLIB file as read: normalized header keywords, raw token rows per
// section, and the original ordering. Section terminators are stripped;
// DEPOT_SECTION / STATION_SECTION never hold their "-1" sentinel as data.
struct RawInstance {
    std::vector<std::pair<std::string, std::string>> keyword_values;
    std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>> sections;
    std::vector<std::string> source_order; // "K:NAME" and "S:DEMAND_SECTION" tags

    const std::string* find_keyword(const std::string& key) const;
    const std::vector<std::vector<std::string>>* find_section(const std::string& name) const;
};

// Typed model of one VRPLIB problem. Node ids are 1-based throughout; per-node
// vectors are sized dimension+1 with slot 0 unused.
struct Instance {
    std::string name;
    std::string declared_type; // reference only, never trusted for semantics
    std::string comment;
    int dimension = 0;
    std::string edge_weight_type;   // "EUC_2D", "EXPLICIT", or "" (implied EUC_2D)
    std::string edge_weight_format; // "FULL_MATRIX" or ""

    std::optional<std::vector<Point>> coords;
    std::optional<SquareMatrix> explicit_weights; // forbidden entries hold kForbiddenArc
    std::optional<std::vector<double>> demands;   // negative = backhaul pickup
    std::optional<double> capacity;
    std::optional<double> distance_limit;
    std::optional<std::vector<std::pair<double, double>>> time_windows;
    std::optional<std::vector<double>> service_times;

    std::vector<int> depots; // nonempty; defaults to {1} when the file has no DEPOT_SECTION
    bool depot_section_present = false;

    std::optional<double> fuel_capacity;
    std::optional<double> fuel_consumption_rate;
    std::optional<double> refuel_rate;
    std::optional<std::vector<int>> stations;

    std::vector<std::pair<int, int>> precedence; // (i, j): i must be visited before j
    std::vector<std::pair<int, int>> forbidden_arcs;

    std::vector<std::string> warnings;

    bool is_depot(int node) const;
    bool is_station(int node) const;
    // All nodes minus depots minus stations, ascending.
    std::vector<int> customers() const;
    double demand(int node) const { return demands ? (*demands)[node] : 0.0; }
    double service_time(int node) const { return service_times ? (*service_times)[node] : 0.0; }
};

struct DistanceMatrix {
    SquareMatrix values;
    bool symmetric = true;
    Rounding rounding = Rounding::None;

    double at(int i, int j) const { return values.at(i, j); }
    int size() const { return values.size(); }
};

RawInstance parse_raw(const std::string& text);

// Full pipeline from file text to a validated Instance. Accepts "-1", "EOF",
// or the next all-caps header as section terminators, and both space and
// underscore keyword separators. Throws ParseError on malformed input.
Instance parse_instance(const std::string& text);

// Emits text that re-parses to a field-identical Instance (numeric equality).
// Sections appear only when present on the instance, in canonical order.
std::string write_instance(const Instance& inst);

// TSPLIB convention: nearest-integer only for EUC_2D metrics under a declared
// TSP/CVRP type; exact otherwise.
Rounding default_rounding(const Instance& inst);

DistanceMatrix build_distance_matrix(const Instance& inst, Rounding rounding);
inline DistanceMatrix build_distance_matrix(const Instance& inst) {
    return build_distance_matrix(inst, default_rounding(inst));
}

// Shortest text form that round-trips through parsing (to_chars).
std::string format_number(double v);

// Uppercases and unifies space/underscore separators: "distance limit" ->
// "DISTANCE_LIMIT".
std::string normalize_keyword(const std::string& raw);

} // namespace vrpkit
