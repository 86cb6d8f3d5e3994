#include "vrpkit/sol_file.hpp"

#include <algorithm>
#include <sstream>

#include "vrpkit/errors.hpp"

namespace vrpkit {

std::string to_sol_text(const Solution& sol, double cost_value) {
    std::ostringstream out;
    for (size_t r = 0; r < sol.routes.size(); ++r) {
        out << "Route #" << (r + 1) << ":";
        for (int v : sol.routes[r].visits) out << " " << v;
        out << "\n";
    }
    out << "Cost " << format_number(cost_value) << "\n";
    return out.str();
}

ParsedSol parse_sol_text(const std::string& text) {
    ParsedSol parsed;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("Route", 0) == 0) {
            const size_t colon = line.find(':');
            if (colon == std::string::npos)
                throw ParseError("route line without ':'", lineno);
            std::istringstream row(line.substr(colon + 1));
            std::vector<int> visits;
            std::string tok;
            while (row >> tok) {
                try {
                    size_t used = 0;
                    const int v = std::stoi(tok, &used);
                    if (used != tok.size()) throw std::invalid_argument(tok);
                    visits.push_back(v);
                } catch (const std::exception&) {
                    throw ParseError("malformed node id '" + tok + "'", lineno);
                }
            }
            parsed.routes.push_back(std::move(visits));
        } else if (line.rfind("Cost", 0) == 0) {
            std::istringstream row(line.substr(4));
            double c = 0.0;
            if (!(row >> c)) throw ParseError("malformed Cost line", lineno);
            parsed.cost = c;
        } else {
            throw ParseError("unexpected line '" + line + "' in solution file", lineno);
        }
    }
    return parsed;
}

Solution attach_depots(const ParsedSol& parsed, const Instance& inst,
                       const ConstraintSet& cs, const DistanceMatrix& dm) {
    Solution sol;
    for (const auto& visits : parsed.routes) {
        Route route;
        route.visits = visits;
        bool ids_ok = true;
        for (int v : visits) ids_ok = ids_ok && v >= 1 && v <= inst.dimension;
        if (!ids_ok) {
            // Leave the bad ids for check_solution to report.
            route.depot = inst.depots.front();
            sol.routes.push_back(std::move(route));
            continue;
        }
        // Prefer the cheapest feasible depot; with none feasible keep the
        // cheapest overall so validation reports the real violation.
        int best_feasible = 0, best_any = 0;
        double best_feasible_cost = 0.0, best_any_cost = 0.0;
        for (int depot : inst.depots) {
            Route candidate = route;
            candidate.depot = depot;
            double c = 0.0;
            int prev = depot;
            for (int v : candidate.visits) {
                c += dm.at(prev, v);
                prev = v;
            }
            if (!cs.open_route) c += dm.at(prev, depot);
            if (best_any == 0 || c < best_any_cost) {
                best_any = depot;
                best_any_cost = c;
            }
            if (!candidate.visits.empty() && route_feasible(candidate, inst, cs, dm) &&
                (best_feasible == 0 || c < best_feasible_cost)) {
                best_feasible = depot;
                best_feasible_cost = c;
            }
        }
        route.depot = best_feasible != 0 ? best_feasible : best_any;
        sol.routes.push_back(std::move(route));
    }
    return sol;
}

} // namespace vrpkit
