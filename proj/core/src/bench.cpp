#include "vrpkit/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "vrpkit/errors.hpp"

namespace vrpkit {

double gap_percent(double objective, double reference) {
    return (objective - reference) / reference * 100.0;
}

std::map<std::string, double> parse_reference_table(const std::string& text) {
    std::map<std::string, double> refs;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream row(line);
        std::string name;
        double value;
        if (!(row >> name)) continue;
        if (!(row >> value))
            throw ParseError("reference table: missing objective for '" + name + "'", lineno);
        refs[name] = value;
    }
    return refs;
}

void BenchReport::finalize() {
    long runs = 0, errored = 0, feasible_runs = 0;
    double obj_sum = 0.0, gap_sum = 0.0;
    long obj_count = 0, gap_count = 0;
    total_time_s = 0.0;
    for (const auto& row : rows) {
        for (const auto& run : row.runs) {
            ++runs;
            if (run.runtime_error) ++errored;
            if (run.feasible) ++feasible_runs;
        }
        total_time_s += row.total_time_s;
        if (row.best_objective) {
            obj_sum += *row.best_objective;
            ++obj_count;
        }
        if (row.gap) {
            gap_sum += *row.gap;
            ++gap_count;
        }
    }
    mean_objective = obj_count ? obj_sum / obj_count : 0.0;
    mean_gap = gap_count ? gap_sum / gap_count : 0.0;
    rer_percent = runs ? 100.0 * errored / runs : 0.0;
    sr_percent = runs ? 100.0 * feasible_runs / runs : 0.0;
}

namespace {
std::string fixed2(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << v;
    return out.str();
}
} // namespace

std::string BenchReport::table() const {
    std::vector<std::array<std::string, 7>> cells;
    cells.push_back({"name", "variant", "objective", "reference", "gap%", "time_s", "status"});
    for (const auto& row : rows) {
        cells.push_back({row.name, row.variant,
                         row.best_objective ? fixed2(*row.best_objective) : "-",
                         row.reference ? fixed2(*row.reference) : "-",
                         row.gap ? fixed2(*row.gap) : "-", fixed2(row.total_time_s),
                         row.runtime_error ? "error" : (row.feasible ? "ok" : "infeasible")});
    }
    std::array<size_t, 7> width{};
    for (const auto& r : cells)
        for (size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    std::ostringstream out;
    for (const auto& r : cells) {
        for (size_t c = 0; c < r.size(); ++c)
            out << std::left << std::setw(static_cast<int>(width[c]) + 2) << r[c];
        out << "\n";
    }
    out << "\n";
    out << "instances " << rows.size() << "\n";
    out << "mean_objective " << fixed2(mean_objective) << "\n";
    out << "mean_gap_percent " << fixed2(mean_gap) << "\n";
    out << "total_time_s " << fixed2(total_time_s) << "\n";
    out << "RER_percent " << fixed2(rer_percent) << "\n";
    out << "SR_percent " << fixed2(sr_percent) << "\n";
    for (const auto& w : warnings) out << "warning: " << w << "\n";
    return out.str();
}

std::string BenchReport::csv() const {
    std::ostringstream out;
    out << "name,variant,seed,objective,reference,gap_percent,wall_time_s,feasible,"
           "runtime_error\n";
    for (const auto& row : rows) {
        for (const auto& run : row.runs) {
            out << row.name << "," << row.variant << "," << run.seed << ",";
            if (run.feasible) out << format_number(run.objective);
            out << ",";
            if (row.reference) out << format_number(*row.reference);
            out << ",";
            if (row.reference && run.feasible)
                out << format_number(gap_percent(run.objective, *row.reference));
            out << "," << format_number(run.wall_time_s) << "," << (run.feasible ? 1 : 0)
                << "," << (run.runtime_error ? 1 : 0) << "\n";
        }
    }
    return out.str();
}

BenchReport run_bench(const std::vector<std::pair<std::string, std::string>>& named_texts,
                      const std::map<std::string, double>& references,
                      const BenchOptions& opts) {
    BenchReport report;
    report.rows.resize(named_texts.size());

    std::atomic<size_t> cursor{0};
    auto worker = [&] {
        while (true) {
            const size_t i = cursor.fetch_add(1);
            if (i >= named_texts.size()) return;
            const auto& [name, text] = named_texts[i];
            BenchRow& row = report.rows[i];
            row.name = name;
            try {
                const Instance inst = parse_instance(text);
                const VariantSignature sig = classify(inst, opts.hints);
                row.variant = sig.code;
                const Rounding rounding = opts.rounding.value_or(default_rounding(inst));
                const DistanceMatrix dm = build_distance_matrix(inst, rounding);
                for (std::uint64_t seed : opts.seeds) {
                    SeedRun run;
                    run.seed = seed;
                    try {
                        SolverConfig cfg = opts.solver;
                        cfg.seed = seed;
                        auto [sol, stats] = solve(inst, sig.flags, dm, cfg);
                        const FeasibilityReport rep = check_solution(sol, inst, sig.flags, dm);
                        run.objective = sol.cached_cost;
                        run.wall_time_s = stats.wall_time_s;
                        run.feasible = rep.feasible;
                        if (!rep.feasible) run.error = "infeasible output";
                    } catch (const std::exception& e) {
                        run.runtime_error = true;
                        run.error = e.what();
                    }
                    row.total_time_s += run.wall_time_s;
                    row.runs.push_back(std::move(run));
                }
            } catch (const std::exception& e) {
                SeedRun run;
                run.seed = opts.seeds.empty() ? 0 : opts.seeds.front();
                run.runtime_error = true;
                run.error = e.what();
                row.runs.push_back(std::move(run));
            }
            for (const auto& run : row.runs) {
                if (!run.feasible) continue;
                if (!row.best_objective || run.objective < *row.best_objective)
                    row.best_objective = run.objective;
            }
            row.feasible = row.best_objective.has_value();
            row.runtime_error = !row.runs.empty() &&
                                std::all_of(row.runs.begin(), row.runs.end(),
                                            [](const SeedRun& r) { return r.runtime_error; });
        }
    };

    const int workers = std::max(1, opts.workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (auto& row : report.rows) {
        const auto ref = references.find(row.name);
        if (ref == references.end()) {
            report.warnings.push_back("no reference objective for '" + row.name + "'");
            continue;
        }
        row.reference = ref->second;
        if (row.best_objective && ref->second > 0)
            row.gap = gap_percent(*row.best_objective, ref->second);
    }
    report.finalize();
    return report;
}

} // namespace vrpkit
