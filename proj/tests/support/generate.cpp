#include "generate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "vrpkit/constraints.hpp"
#include "vrpkit/rng.hpp"

namespace vrpkit::testgen {

const std::vector<std::string>& variant_codes() {
    static const std::vector<std::string> codes = {
        // single depot, no energy
        "CVRP", "OCVRP", "CVRPB", "CVRPL", "CVRPTW", "OCVRPTW", "OCVRPB", "OCVRPL",
        "CVRPBL", "CVRPBTW", "CVRPLTW", "OCVRPBL", "OCVRPBTW", "OCVRPLTW", "CVRPBLTW",
        "OCVRPBLTW", "CVRPMB", "OCVRPMB", "CVRPMBL", "CVRPMBTW", "OCVRPMBL", "OCVRPMBTW",
        "CVRPMBLTW", "OCVRPMBLTW",
        // multi depot
        "MDCVRP", "MDOCVRP", "MDCVRPB", "MDCVRPL", "MDCVRPTW", "MDOCVRPB", "MDOCVRPL",
        "MDOCVRPTW", "MDOCVRPBL", "MDOCVRPBTW", "MDOCVRPLTW", "MDCVRPMB", "MDCVRPMBL",
        "MDCVRPMBTW", "MDOCVRPMB", "MDOCVRPMBL", "MDOCVRPMBTW", "MDCVRPMBLTW",
        "MDOCVRPMBLTW",
        // electric
        "ECVRP", "ECVRPL", "ECVRPTW", "EOCVRP", "ECVRPLTW", "EOCVRPL", "EOCVRPTW",
        "EOCVRPLTW",
        // unconstrained tour
        "TSP"};
    return codes;
}

namespace {

struct Layout {
    int dimension = 0;
    std::vector<int> depots;
    std::vector<int> customers;
    std::vector<int> stations;
    std::vector<Point> coords; // 1-based
};

double dist(const Layout& l, int a, int b) {
    const double dx = l.coords[a].x - l.coords[b].x;
    const double dy = l.coords[a].y - l.coords[b].y;
    return std::sqrt(dx * dx + dy * dy);
}

double nearest_depot_dist(const Layout& l, int node) {
    double best = dist(l, l.depots[0], node);
    for (int d : l.depots) best = std::min(best, dist(l, d, node));
    return best;
}

void emit_section(std::ostringstream& out, const std::string& name,
                  const std::vector<std::string>& rows, Terminator term, bool last_section) {
    out << name << "\n";
    for (const auto& row : rows) out << row << "\n";
    if (term == Terminator::Dash) out << "-1\n";
    // NextHeader: nothing, the following header closes the section.
    // Eof: nothing; the trailing EOF closes the last one.
    (void)last_section;
}

} // namespace

std::string variant_instance_text(const std::string& code, const GenOptions& opt) {
    const auto flags = parse_variant_code(code);
    if (!flags) throw std::invalid_argument("unknown variant code " + code);
    Rng rng(opt.seed * 2654435761u + 17);

    Layout layout;
    const int depot_count = flags->multi_depot ? 2 : 1;
    const int station_count = flags->electric ? 2 : 0;
    layout.dimension = depot_count + opt.customers + station_count;
    layout.coords.resize(layout.dimension + 1);
    for (int i = 1; i <= layout.dimension; ++i)
        layout.coords[i] = {static_cast<double>(rng.next_int(0, 60)),
                            static_cast<double>(rng.next_int(0, 60))};
    for (int d = 1; d <= depot_count; ++d) layout.depots.push_back(d);
    for (int c = depot_count + 1; c <= depot_count + opt.customers; ++c)
        layout.customers.push_back(c);
    for (int s = depot_count + opt.customers + 1; s <= layout.dimension; ++s)
        layout.stations.push_back(s);

    // Demands: at least one pickup on backhaul rows, depot/station zero.
    std::vector<double> demand(layout.dimension + 1, 0.0);
    const bool haul = flags->backhaul || flags->mixed_backhaul;
    if (flags->capacity) {
        bool has_pickup = false;
        for (int c : layout.customers) {
            double q = static_cast<double>(rng.next_int(1, 9));
            if (haul && rng.next_double() < 0.34) {
                q = -q;
                has_pickup = true;
            }
            demand[c] = q;
        }
        if (haul && !has_pickup) demand[layout.customers.back()] = -3;
    }
    double capacity = 0.0;
    if (flags->capacity) {
        double total_abs = 0.0, max_abs = 0.0;
        for (int c : layout.customers) {
            total_abs += std::fabs(demand[c]);
            max_abs = std::max(max_abs, std::fabs(demand[c]));
        }
        capacity = std::max(max_abs, std::ceil(total_abs / 3.0));
    }

    double distance_limit = 0.0;
    if (flags->distance_limit) {
        double worst = 0.0;
        for (int c : layout.customers) worst = std::max(worst, nearest_depot_dist(layout, c));
        distance_limit = std::ceil(worst * 2.0 * 1.25) + 1.0;
    }

    // Windows come from a seed tour so a feasible schedule always exists.
    std::vector<double> service(layout.dimension + 1, 0.0);
    std::vector<std::pair<double, double>> window(layout.dimension + 1, {0.0, 0.0});
    double horizon = 0.0;
    if (flags->time_windows) {
        for (int c : layout.customers) service[c] = static_cast<double>(rng.next_int(1, 5));
        std::vector<int> tour = layout.customers;
        rng.shuffle(tour);
        double clock = 0.0;
        int prev = layout.depots[0];
        for (int c : tour) {
            clock += dist(layout, prev, c);
            const double early = std::max(0.0, clock - static_cast<double>(rng.next_int(0, 10)));
            const double late = clock + static_cast<double>(rng.next_int(8, 30));
            window[c] = {early, late};
            clock = std::max(clock, early) + service[c];
            prev = c;
        }
        for (int c : layout.customers)
            horizon = std::max(horizon, window[c].second + service[c] +
                                            nearest_depot_dist(layout, c) * 2.0);
        horizon = std::ceil(horizon + 10.0);
        for (int d : layout.depots) window[d] = {0.0, horizon};
        for (int s : layout.stations) window[s] = {0.0, horizon};
    }

    double fuel_capacity = 0.0;
    const double consumption = 1.0, refuel = 2.0;
    if (flags->electric) {
        double worst = 0.0;
        for (int c : layout.customers) worst = std::max(worst, nearest_depot_dist(layout, c));
        const double factor = opt.generous_fuel ? 20.0 : 2.4;
        fuel_capacity = std::ceil(worst * factor) + 5.0;
    }

    std::ostringstream out;
    out << "NAME : " << code << "_n" << opt.customers << "_s" << opt.seed << "\n";
    out << "TYPE : " << code << "\n";
    out << "DIMENSION : " << layout.dimension << "\n";
    out << "EDGE_WEIGHT_TYPE : EUC_2D\n";
    if (flags->capacity) out << "CAPACITY : " << format_number(capacity) << "\n";
    if (flags->distance_limit)
        out << "DISTANCE_LIMIT : " << format_number(distance_limit) << "\n";
    if (flags->electric) {
        out << "FUEL_CAPACITY : " << format_number(fuel_capacity) << "\n";
        out << "FUEL_CONSUMPTION_RATE : " << format_number(consumption) << "\n";
        out << "REFUEL_RATE : " << format_number(refuel) << "\n";
    }

    const Terminator term = opt.terminator;
    std::vector<std::string> rows;
    for (int i = 1; i <= layout.dimension; ++i)
        rows.push_back(std::to_string(i) + " " + format_number(layout.coords[i].x) + " " +
                       format_number(layout.coords[i].y));
    emit_section(out, "NODE_COORD_SECTION", rows, term, false);

    if (flags->capacity) {
        rows.clear();
        for (int i = 1; i <= layout.dimension; ++i)
            rows.push_back(std::to_string(i) + " " + format_number(demand[i]));
        emit_section(out, "DEMAND_SECTION", rows, term, false);
    }
    if (flags->time_windows) {
        rows.clear();
        for (int i = 1; i <= layout.dimension; ++i)
            rows.push_back(std::to_string(i) + " " + format_number(window[i].first) + " " +
                           format_number(window[i].second));
        emit_section(out, "TIME_WINDOW_SECTION", rows, term, false);
        rows.clear();
        for (int i = 1; i <= layout.dimension; ++i)
            rows.push_back(std::to_string(i) + " " + format_number(service[i]));
        emit_section(out, "SERVICE_TIME_SECTION", rows, term, false);
    }
    if (flags->electric) {
        rows.clear();
        for (int s : layout.stations) rows.push_back(std::to_string(s));
        emit_section(out, "STATION_SECTION", rows, term, false);
    }
    if (code != "TSP") {
        rows.clear();
        for (int d : layout.depots) rows.push_back(std::to_string(d));
        // Depot section keeps its dash terminator under every style; the
        // format names it as the canonical closer for this section.
        emit_section(out, "DEPOT_SECTION", rows,
                     term == Terminator::NextHeader ? Terminator::NextHeader
                                                    : Terminator::Dash,
                     true);
    }
    if (term == Terminator::Eof || code == "TSP") out << "EOF\n";
    return out.str();
}

namespace {

std::string matrix_text(const std::string& name, const std::string& type, int dimension,
                        const std::vector<std::vector<double>>& w,
                        const std::string& extra_headers,
                        const std::string& extra_sections) {
    std::ostringstream out;
    out << "NAME : " << name << "\n";
    out << "TYPE : " << type << "\n";
    out << "DIMENSION : " << dimension << "\n";
    out << "EDGE_WEIGHT_TYPE : EXPLICIT\n";
    out << "EDGE_WEIGHT_FORMAT : FULL_MATRIX\n";
    out << extra_headers;
    out << "EDGE_WEIGHT_SECTION\n";
    for (int i = 0; i < dimension; ++i) {
        std::string line;
        for (int j = 0; j < dimension; ++j) {
            if (j) line += " ";
            line += format_number(w[i][j]);
        }
        out << line << "\n";
    }
    out << extra_sections;
    out << "EOF\n";
    return out.str();
}

} // namespace

std::string atsp_instance_text(int nodes, std::uint64_t seed) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::vector<double>> w(nodes, std::vector<double>(nodes, 0.0));
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j)
            if (i != j) w[i][j] = static_cast<double>(rng.next_int(5, 99));
    return matrix_text("atsp_n" + std::to_string(nodes) + "_s" + std::to_string(seed), "ATSP",
                       nodes, w, "", "");
}

std::string acvrp_instance_text(int customers, std::uint64_t seed) {
    Rng rng(seed * 48271u + 3);
    const int n = customers + 1;
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) w[i][j] = static_cast<double>(rng.next_int(5, 99));
    std::ostringstream headers, sections;
    double total = 0.0, mx = 0.0;
    std::vector<double> demand(n + 1, 0.0);
    for (int c = 2; c <= n; ++c) {
        demand[c] = static_cast<double>(rng.next_int(1, 9));
        total += demand[c];
        mx = std::max(mx, demand[c]);
    }
    headers << "CAPACITY : " << format_number(std::max(mx, std::ceil(total / 3.0))) << "\n";
    sections << "DEMAND_SECTION\n";
    for (int i = 1; i <= n; ++i)
        sections << i << " " << format_number(demand[i]) << "\n";
    sections << "DEPOT_SECTION\n1\n-1\n";
    return matrix_text("acvrp_n" + std::to_string(customers) + "_s" + std::to_string(seed),
                       "ACVRP", n, w, headers.str(), sections.str());
}

std::string sop_instance_text(int nodes, std::uint64_t seed) {
    Rng rng(seed * 69621u + 11);
    std::vector<std::vector<double>> w(nodes, std::vector<double>(nodes, 0.0));
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j)
            if (i != j) w[i][j] = static_cast<double>(rng.next_int(5, 99));
    // Precedence pairs drawn from a random total order stay acyclic; the
    // marker -1 at (i, j) states that j comes before i. Node 1 (the path
    // origin) carries no pairs.
    std::vector<int> order(nodes - 1);
    for (int i = 0; i < nodes - 1; ++i) order[i] = i + 1;
    rng.shuffle(order);
    const int pair_count = std::max(1, nodes / 3);
    for (int k = 0; k < pair_count; ++k) {
        const int a = rng.next_index(nodes - 2);
        const int b = static_cast<int>(rng.next_int(a + 1, nodes - 2));
        w[order[b]][order[a]] = -1.0; // order[a] precedes order[b]
    }
    return matrix_text("sop_n" + std::to_string(nodes) + "_s" + std::to_string(seed), "SOP",
                       nodes, w, "", "");
}

KnownOptimum convex_tsp(int nodes, std::uint64_t seed) {
    Rng rng(seed * 1000003u + 7);
    // Distinct angles with a guaranteed gap keep the points strictly convex.
    std::vector<double> angles(nodes);
    const double tau = 2.0 * std::numbers::pi;
    for (int i = 0; i < nodes; ++i)
        angles[i] = (i + 0.25 + 0.5 * rng.next_double()) * tau / nodes;
    const double radius = 1000.0;
    std::vector<Point> pts(nodes);
    for (int i = 0; i < nodes; ++i)
        pts[i] = {radius * std::cos(angles[i]), radius * std::sin(angles[i])};

    double perimeter = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const Point& a = pts[i];
        const Point& b = pts[(i + 1) % nodes];
        perimeter += std::hypot(a.x - b.x, a.y - b.y);
    }

    // Shuffle node ids so the file order carries no hint of the optimal tour.
    std::vector<int> id_of(nodes);
    for (int i = 0; i < nodes; ++i) id_of[i] = i;
    rng.shuffle(id_of);

    KnownOptimum out;
    out.name = "circle_n" + std::to_string(nodes) + "_s" + std::to_string(seed);
    std::ostringstream text;
    text << "NAME : " << out.name << "\n";
    text << "DIMENSION : " << nodes << "\n";
    text << "EDGE_WEIGHT_TYPE : EUC_2D\n";
    text << "NODE_COORD_SECTION\n";
    std::vector<int> position(nodes);
    for (int i = 0; i < nodes; ++i) position[id_of[i]] = i;
    for (int id = 0; id < nodes; ++id) {
        const Point& p = pts[position[id]];
        text << (id + 1) << " " << format_number(p.x) << " " << format_number(p.y) << "\n";
    }
    text << "EOF\n";
    out.text = text.str();
    out.optimum = perimeter;
    return out;
}

KnownOptimum skewed_atsp(int nodes, std::uint64_t seed) {
    const KnownOptimum base = convex_tsp(nodes, seed);
    Rng rng(seed * 22695477u + 1);

    const Instance inst = parse_instance(base.text);
    std::vector<double> potential(nodes + 1, 0.0);
    for (int i = 1; i <= nodes; ++i) potential[i] = 50.0 * rng.next_double();
    const double shift = 60.0;

    // Recover hull successor ids so the planted cycle gets zero noise.
    std::vector<int> ids(nodes);
    for (int i = 0; i < nodes; ++i) ids[i] = i + 1;
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        const Point& pa = (*inst.coords)[a];
        const Point& pb = (*inst.coords)[b];
        return std::atan2(pa.y, pa.x) < std::atan2(pb.y, pb.x);
    });
    std::vector<int> succ(nodes + 1, 0);
    for (int i = 0; i < nodes; ++i) succ[ids[i]] = ids[(i + 1) % nodes];

    std::vector<std::vector<double>> w(nodes, std::vector<double>(nodes, 0.0));
    for (int i = 1; i <= nodes; ++i) {
        for (int j = 1; j <= nodes; ++j) {
            if (i == j) continue;
            const Point& a = (*inst.coords)[i];
            const Point& b = (*inst.coords)[j];
            const double d = std::hypot(a.x - b.x, a.y - b.y);
            const double noise = succ[i] == j ? 0.0 : 1.0 + 19.0 * rng.next_double();
            w[i - 1][j - 1] = d + potential[j] - potential[i] + shift + noise;
        }
    }

    KnownOptimum out;
    out.name = "skew_n" + std::to_string(nodes) + "_s" + std::to_string(seed);
    out.text = matrix_text(out.name, "ATSP", nodes, w, "", "");
    out.optimum = base.optimum + shift * nodes;
    return out;
}

} // namespace vrpkit::testgen
