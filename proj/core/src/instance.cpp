#include "vrpkit/instance.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <system_error>

#include "vrpkit/errors.hpp"

namespace vrpkit {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, int line) {
    const char* begin = tok.c_str();
    const char* end = begin + tok.size();
    if (begin != end && *begin == '+') ++begin;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError("malformed numeric token '" + tok + "'", line);
    return v;
}

long parse_int(const std::string& tok, int line) {
    const char* begin = tok.c_str();
    const char* end = begin + tok.size();
    if (begin != end && *begin == '+') ++begin;
    long v = 0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError("malformed integer token '" + tok + "'", line);
    return v;
}

bool looks_like_header(const std::string& line) {
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return std::isalpha(static_cast<unsigned char>(c)) != 0;
    }
    return false;
}

struct RowWithLine {
    std::vector<std::string> tokens;
    int line;
};

} // namespace

std::string normalize_keyword(const std::string& raw) {
    std::string out;
    bool pending_sep = false;
    for (char c : trim(raw)) {
        if (c == ' ' || c == '\t' || c == '_') {
            pending_sep = !out.empty();
            continue;
        }
        if (pending_sep) {
            out.push_back('_');
            pending_sep = false;
        }
        out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

const std::string* RawInstance::find_keyword(const std::string& key) const {
    for (const auto& [k, v] : keyword_values)
        if (k == key) return &v;
    return nullptr;
}

const std::vector<std::vector<std::string>>* RawInstance::find_section(
    const std::string& name) const {
    for (const auto& [k, v] : sections)
        if (k == name) return &v;
    return nullptr;
}

RawInstance parse_raw(const std::string& text) {
    RawInstance raw;
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        lines.push_back(cur);
    }

    std::vector<std::vector<std::string>>* open_section = nullptr;
    std::string open_section_name;

    auto start_section = [&](const std::string& name) {
        raw.sections.emplace_back(name, std::vector<std::vector<std::string>>{});
        raw.source_order.push_back("S:" + name);
        open_section = &raw.sections.back().second;
        open_section_name = name;
    };

    for (size_t idx = 0; idx < lines.size(); ++idx) {
        const int lineno = static_cast<int>(idx) + 1;
        std::string line = trim(lines[idx]);
        if (line.empty()) continue;

        if (looks_like_header(line)) {
            std::string head = line;
            std::string value;
            const size_t colon = line.find(':');
            if (colon != std::string::npos) {
                head = line.substr(0, colon);
                value = trim(line.substr(colon + 1));
            }
            const std::string key = normalize_keyword(head);
            if (key == "EOF") break;
            if (key.ends_with("_SECTION")) {
                open_section = nullptr;
                start_section(key);
                // Tolerate data on the header line itself ("DEPOT_SECTION: 1").
                if (!value.empty()) open_section->push_back(split_tokens(value));
                continue;
            }
            open_section = nullptr;
            if (colon == std::string::npos)
                throw ParseError("expected 'KEYWORD : value' or a section header, got '" +
                                     line + "'",
                                 lineno);
            raw.keyword_values.emplace_back(key, value);
            raw.source_order.push_back("K:" + key);
            continue;
        }

        if (open_section == nullptr)
            throw ParseError("data row outside any section", lineno);

        std::vector<std::string> tokens = split_tokens(line);
        if (open_section_name != "EDGE_WEIGHT_SECTION") {
            // A lone -1 row terminates the section; in id-list sections the
            // terminator may share a line with data.
            if (tokens.size() == 1 && tokens[0] == "-1") {
                open_section = nullptr;
                continue;
            }
            if (open_section_name == "DEPOT_SECTION" ||
                open_section_name == "STATION_SECTION") {
                auto it = std::find(tokens.begin(), tokens.end(), "-1");
                if (it != tokens.end()) {
                    tokens.erase(it, tokens.end());
                    if (!tokens.empty()) open_section->push_back(std::move(tokens));
                    open_section = nullptr;
                    continue;
                }
            }
        }
        open_section->push_back(std::move(tokens));
    }
    return raw;
}

namespace {

// Per-node sections: rows of (id, fixed number of values). Returns values
// indexed by node id.
template <typename Fill>
void read_per_node_section(const std::vector<std::vector<std::string>>& rows,
                           const std::string& name, int dimension, size_t row_width,
                           Fill&& fill) {
    if (rows.size() != static_cast<size_t>(dimension))
        throw ParseError(name + ": section length mismatch (got " +
                         std::to_string(rows.size()) + " rows, dimension is " +
                         std::to_string(dimension) + ")");
    std::vector<char> seen(dimension + 1, 0);
    for (const auto& row : rows) {
        if (row.size() != row_width)
            throw ParseError(name + ": expected " + std::to_string(row_width) +
                             " tokens per row, got " + std::to_string(row.size()));
        const long id = parse_int(row[0], 0);
        if (id < 1 || id > dimension)
            throw ParseError(name + ": node id " + std::to_string(id) + " out of range");
        if (seen[id])
            throw ParseError(name + ": duplicate node id " + std::to_string(id));
        seen[id] = 1;
        fill(static_cast<int>(id), row);
    }
}

std::vector<int> read_id_list_section(const std::vector<std::vector<std::string>>& rows,
                                      const std::string& name, int dimension) {
    std::vector<int> ids;
    std::set<int> seen;
    for (const auto& row : rows) {
        for (const auto& tok : row) {
            const long id = parse_int(tok, 0);
            if (id < 1 || id > dimension)
                throw ParseError(name + ": node id " + std::to_string(id) +
                                 " out of range 1.." + std::to_string(dimension));
            if (!seen.insert(static_cast<int>(id)).second)
                throw ParseError(name + ": duplicate node id " + std::to_string(id));
            ids.push_back(static_cast<int>(id));
        }
    }
    return ids;
}

} // namespace

Instance parse_instance(const std::string& text) {
    const RawInstance raw = parse_raw(text);
    Instance inst;

    static const std::set<std::string> known_keywords = {
        "NAME",          "COMMENT",          "TYPE",
        "DIMENSION",     "EDGE_WEIGHT_TYPE", "EDGE_WEIGHT_FORMAT",
        "CAPACITY",      "DISTANCE_LIMIT",   "FUEL_CAPACITY",
        "FUEL_CONSUMPTION_RATE", "REFUEL_RATE"};
    static const std::set<std::string> known_sections = {
        "NODE_COORD_SECTION", "DEMAND_SECTION",       "DEPOT_SECTION",
        "TIME_WINDOW_SECTION", "SERVICE_TIME_SECTION", "STATION_SECTION",
        "EDGE_WEIGHT_SECTION"};

    for (const auto& [key, value] : raw.keyword_values) {
        if (!known_keywords.count(key))
            inst.warnings.push_back("unknown keyword '" + key + "' ignored");
    }
    for (const auto& [name, rows] : raw.sections) {
        if (!known_sections.count(name))
            inst.warnings.push_back("unknown section '" + name + "' ignored");
    }

    if (const auto* v = raw.find_keyword("NAME")) inst.name = *v;
    if (const auto* v = raw.find_keyword("TYPE")) inst.declared_type = trim(*v);
    if (const auto* v = raw.find_keyword("COMMENT")) inst.comment = *v;

    const auto* dim_str = raw.find_keyword("DIMENSION");
    if (!dim_str) throw ParseError("missing DIMENSION");
    const long dim = parse_int(*dim_str, 0);
    if (dim < 1) throw ParseError("DIMENSION must be >= 1");
    inst.dimension = static_cast<int>(dim);

    if (const auto* v = raw.find_keyword("EDGE_WEIGHT_TYPE")) {
        inst.edge_weight_type = normalize_keyword(*v);
        if (inst.edge_weight_type != "EUC_2D" && inst.edge_weight_type != "EXPLICIT")
            throw ParseError("unsupported EDGE_WEIGHT_TYPE '" + inst.edge_weight_type + "'");
    }
    if (const auto* v = raw.find_keyword("EDGE_WEIGHT_FORMAT")) {
        inst.edge_weight_format = normalize_keyword(*v);
        if (inst.edge_weight_format != "FULL_MATRIX")
            throw ParseError("unsupported EDGE_WEIGHT_FORMAT '" + inst.edge_weight_format +
                             "' (only FULL_MATRIX)");
    }

    auto positive_scalar = [&](const char* key, const char* what) -> std::optional<double> {
        const auto* v = raw.find_keyword(key);
        if (!v) return std::nullopt;
        const double x = parse_double(trim(*v), 0);
        if (x <= 0) throw ParseError(std::string(what) + " must be positive");
        return x;
    };
    inst.capacity = positive_scalar("CAPACITY", "CAPACITY");
    inst.distance_limit = positive_scalar("DISTANCE_LIMIT", "DISTANCE_LIMIT");
    inst.fuel_capacity = positive_scalar("FUEL_CAPACITY", "FUEL_CAPACITY");
    inst.fuel_consumption_rate = positive_scalar("FUEL_CONSUMPTION_RATE", "FUEL_CONSUMPTION_RATE");
    inst.refuel_rate = positive_scalar("REFUEL_RATE", "REFUEL_RATE");

    if (const auto* rows = raw.find_section("NODE_COORD_SECTION")) {
        std::vector<Point> coords(inst.dimension + 1);
        read_per_node_section(*rows, "NODE_COORD_SECTION", inst.dimension, 3,
                              [&](int id, const std::vector<std::string>& row) {
                                  coords[id] = {parse_double(row[1], 0),
                                                parse_double(row[2], 0)};
                              });
        inst.coords = std::move(coords);
    }
    if (const auto* rows = raw.find_section("DEMAND_SECTION")) {
        std::vector<double> demands(inst.dimension + 1, 0.0);
        read_per_node_section(*rows, "DEMAND_SECTION", inst.dimension, 2,
                              [&](int id, const std::vector<std::string>& row) {
                                  demands[id] = parse_double(row[1], 0);
                              });
        inst.demands = std::move(demands);
    }
    if (const auto* rows = raw.find_section("TIME_WINDOW_SECTION")) {
        std::vector<std::pair<double, double>> tw(inst.dimension + 1, {0.0, 0.0});
        read_per_node_section(*rows, "TIME_WINDOW_SECTION", inst.dimension, 3,
                              [&](int id, const std::vector<std::string>& row) {
                                  const double e = parse_double(row[1], 0);
                                  const double l = parse_double(row[2], 0);
                                  if (e > l)
                                      throw ParseError("TIME_WINDOW_SECTION: node " +
                                                       std::to_string(id) +
                                                       " has earliest > latest");
                                  tw[id] = {e, l};
                              });
        inst.time_windows = std::move(tw);
    }
    if (const auto* rows = raw.find_section("SERVICE_TIME_SECTION")) {
        std::vector<double> st(inst.dimension + 1, 0.0);
        read_per_node_section(*rows, "SERVICE_TIME_SECTION", inst.dimension, 2,
                              [&](int id, const std::vector<std::string>& row) {
                                  const double s = parse_double(row[1], 0);
                                  if (s < 0)
                                      throw ParseError("SERVICE_TIME_SECTION: node " +
                                                       std::to_string(id) +
                                                       " has negative service time");
                                  st[id] = s;
                              });
        inst.service_times = std::move(st);
    }
    if (const auto* rows = raw.find_section("DEPOT_SECTION")) {
        inst.depots = read_id_list_section(*rows, "DEPOT_SECTION", inst.dimension);
        inst.depot_section_present = true;
        if (inst.depots.empty()) throw ParseError("DEPOT_SECTION: no depot ids");
    } else {
        inst.depots = {1};
    }
    if (const auto* rows = raw.find_section("STATION_SECTION")) {
        inst.stations = read_id_list_section(*rows, "STATION_SECTION", inst.dimension);
    }

    if (const auto* rows = raw.find_section("EDGE_WEIGHT_SECTION")) {
        std::vector<double> flat;
        for (const auto& row : *rows)
            for (const auto& tok : row) flat.push_back(parse_double(tok, 0));
        const size_t need = static_cast<size_t>(inst.dimension) * inst.dimension;
        // SOP files lead the matrix with a redundant dimension token.
        if (flat.size() == need + 1 &&
            flat.front() == static_cast<double>(inst.dimension))
            flat.erase(flat.begin());
        if (flat.size() != need)
            throw ParseError("EDGE_WEIGHT_SECTION: expected " + std::to_string(need) +
                             " entries, got " + std::to_string(flat.size()));
        SquareMatrix m(inst.dimension);
        size_t k = 0;
        for (int i = 1; i <= inst.dimension; ++i) {
            for (int j = 1; j <= inst.dimension; ++j, ++k) {
                const double w = flat[k];
                if (i == j) {
                    if (w != 0.0 && w != -1.0)
                        inst.warnings.push_back("EDGE_WEIGHT_SECTION: nonzero diagonal at node " +
                                                std::to_string(i) + " zeroed");
                    m.at(i, j) = 0.0;
                } else if (w == -1.0) {
                    // TSPLIB SOP convention: -1 at (i, j) means j precedes i and
                    // the arc i->j is unusable.
                    inst.precedence.emplace_back(j, i);
                    inst.forbidden_arcs.emplace_back(i, j);
                    m.at(i, j) = kForbiddenArc;
                } else {
                    m.at(i, j) = w;
                }
            }
        }
        inst.explicit_weights = std::move(m);
    }

    if (!inst.coords && !inst.explicit_weights)
        throw ParseError("missing geometry: need NODE_COORD_SECTION or EDGE_WEIGHT_SECTION");
    if (inst.edge_weight_type == "EXPLICIT" && !inst.explicit_weights)
        throw ParseError("EDGE_WEIGHT_TYPE EXPLICIT without EDGE_WEIGHT_SECTION");
    if (inst.edge_weight_type == "EUC_2D" && !inst.coords)
        throw ParseError("EDGE_WEIGHT_TYPE EUC_2D without NODE_COORD_SECTION");

    for (int d : inst.depots) {
        if (inst.demands && (*inst.demands)[d] != 0.0)
            throw ParseError("depot " + std::to_string(d) + " has nonzero demand");
    }
    if (inst.stations) {
        std::set<int> depot_set(inst.depots.begin(), inst.depots.end());
        for (int s : *inst.stations) {
            if (depot_set.count(s))
                throw ParseError("node " + std::to_string(s) +
                                 " listed as both depot and station");
            if (inst.demands && (*inst.demands)[s] != 0.0)
                inst.warnings.push_back("station " + std::to_string(s) +
                                        " has nonzero demand; ignored");
        }
    }
    return inst;
}

bool Instance::is_depot(int node) const {
    return std::find(depots.begin(), depots.end(), node) != depots.end();
}

bool Instance::is_station(int node) const {
    if (!stations) return false;
    return std::find(stations->begin(), stations->end(), node) != stations->end();
}

std::vector<int> Instance::customers() const {
    std::vector<int> out;
    out.reserve(dimension);
    for (int i = 1; i <= dimension; ++i)
        if (!is_depot(i) && !is_station(i)) out.push_back(i);
    return out;
}

std::string write_instance(const Instance& inst) {
    std::ostringstream out;
    auto kw = [&](const char* key, const std::string& value) {
        out << key << " : " << value << "\n";
    };
    if (!inst.name.empty()) kw("NAME", inst.name);
    if (!inst.declared_type.empty()) kw("TYPE", inst.declared_type);
    if (!inst.comment.empty()) kw("COMMENT", inst.comment);
    kw("DIMENSION", std::to_string(inst.dimension));
    if (!inst.edge_weight_type.empty()) kw("EDGE_WEIGHT_TYPE", inst.edge_weight_type);
    if (!inst.edge_weight_format.empty()) kw("EDGE_WEIGHT_FORMAT", inst.edge_weight_format);
    if (inst.capacity) kw("CAPACITY", format_number(*inst.capacity));
    if (inst.distance_limit) kw("DISTANCE_LIMIT", format_number(*inst.distance_limit));
    if (inst.fuel_capacity) kw("FUEL_CAPACITY", format_number(*inst.fuel_capacity));
    if (inst.fuel_consumption_rate)
        kw("FUEL_CONSUMPTION_RATE", format_number(*inst.fuel_consumption_rate));
    if (inst.refuel_rate) kw("REFUEL_RATE", format_number(*inst.refuel_rate));

    if (inst.coords) {
        out << "NODE_COORD_SECTION\n";
        for (int i = 1; i <= inst.dimension; ++i)
            out << i << " " << format_number((*inst.coords)[i].x) << " "
                << format_number((*inst.coords)[i].y) << "\n";
    }
    if (inst.demands) {
        out << "DEMAND_SECTION\n";
        for (int i = 1; i <= inst.dimension; ++i)
            out << i << " " << format_number((*inst.demands)[i]) << "\n";
    }
    if (inst.time_windows) {
        out << "TIME_WINDOW_SECTION\n";
        for (int i = 1; i <= inst.dimension; ++i)
            out << i << " " << format_number((*inst.time_windows)[i].first) << " "
                << format_number((*inst.time_windows)[i].second) << "\n";
    }
    if (inst.service_times) {
        out << "SERVICE_TIME_SECTION\n";
        for (int i = 1; i <= inst.dimension; ++i)
            out << i << " " << format_number((*inst.service_times)[i]) << "\n";
    }
    if (inst.stations) {
        out << "STATION_SECTION\n";
        for (int s : *inst.stations) out << s << "\n";
        out << "-1\n";
    }
    if (inst.depot_section_present) {
        out << "DEPOT_SECTION\n";
        for (int d : inst.depots) out << d << "\n";
        out << "-1\n";
    }
    if (inst.explicit_weights) {
        out << "EDGE_WEIGHT_SECTION\n";
        for (int i = 1; i <= inst.dimension; ++i) {
            for (int j = 1; j <= inst.dimension; ++j) {
                const double w = inst.explicit_weights->at(i, j);
                if (j > 1) out << " ";
                out << (std::isinf(w) ? std::string("-1") : format_number(w));
            }
            out << "\n";
        }
    }
    out << "EOF\n";
    return out.str();
}

Rounding default_rounding(const Instance& inst) {
    const bool euclidean = inst.coords && inst.edge_weight_type != "EXPLICIT";
    if (euclidean && (inst.declared_type == "TSP" || inst.declared_type == "CVRP"))
        return Rounding::NearestInteger;
    return Rounding::None;
}

DistanceMatrix build_distance_matrix(const Instance& inst, Rounding rounding) {
    DistanceMatrix dm;
    dm.rounding = rounding;
    if (inst.explicit_weights) {
        dm.values = *inst.explicit_weights;
        dm.symmetric = true;
        for (int i = 1; i <= inst.dimension && dm.symmetric; ++i)
            for (int j = i + 1; j <= inst.dimension; ++j)
                if (dm.values.at(i, j) != dm.values.at(j, i)) {
                    dm.symmetric = false;
                    break;
                }
        for (int i = 1; i <= inst.dimension; ++i)
            for (int j = 1; j <= inst.dimension; ++j) {
                const double w = dm.values.at(i, j);
                if (w < 0 && !std::isinf(w))
                    throw ParseError("negative explicit weight at (" + std::to_string(i) +
                                     ", " + std::to_string(j) + ")");
            }
    } else if (inst.coords) {
        dm.values = SquareMatrix(inst.dimension);
        dm.symmetric = true;
        for (int i = 1; i <= inst.dimension; ++i) {
            for (int j = i + 1; j <= inst.dimension; ++j) {
                const double dx = (*inst.coords)[i].x - (*inst.coords)[j].x;
                const double dy = (*inst.coords)[i].y - (*inst.coords)[j].y;
                double d = std::sqrt(dx * dx + dy * dy);
                if (rounding == Rounding::NearestInteger) d = std::round(d);
                dm.values.at(i, j) = d;
                dm.values.at(j, i) = d;
            }
        }
    } else {
        throw ParseError("missing geometry");
    }
    for (const auto& [from, to] : inst.forbidden_arcs) dm.values.at(from, to) = kForbiddenArc;
    return dm;
}

} // namespace vrpkit
