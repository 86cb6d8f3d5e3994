#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vrpkit/errors.hpp"
#include "vrpkit/sol_file.hpp"

namespace fs = std::filesystem;

namespace vrpkit::cli {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

VariantHints hints_of(const CommonOptions& common) {
    return {common.open_route, common.mixed_backhaul};
}

std::string default_output(const std::string& instance_path) {
    fs::path p(instance_path);
    p.replace_extension(".sol");
    return p.string();
}

} // namespace

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
    Instance inst;
    try {
        inst = parse_instance(read_file(opt.instance_path));
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitParse;
    }
    try {
        const VariantSignature sig = classify(inst, hints_of(opt.common));
        const Rounding rounding = opt.common.rounding.value_or(default_rounding(inst));
        const DistanceMatrix dm = build_distance_matrix(inst, rounding);
        auto [solution, stats] = solve(inst, sig.flags, dm, opt.solver);
        const FeasibilityReport report = check_solution(solution, inst, sig.flags, dm);
        if (!report.feasible) {
            err << "infeasible output:\n" << report.to_text();
            return kExitInfeasible;
        }
        const std::string sol_path =
            opt.output_path.empty() ? default_output(opt.instance_path) : opt.output_path;
        write_file(sol_path, to_sol_text(solution, solution.cached_cost));
        out << "variant " << sig.code << "\n";
        out << "objective " << format_number(solution.cached_cost) << "\n";
        out << stats.to_text();
        out << "solution " << sol_path << "\n";
        if (stats.truncated) err << "warning: time limit hit; best-so-far solution emitted\n";
        return kExitOk;
    } catch (const ConstructionError& e) {
        err << "infeasible construction: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const SolverDefect& e) {
        err << "internal defect: " << e.what() << "\n";
        return kExitDefect;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_validate(const ValidateOptions& opt, std::ostream& out, std::ostream& err) {
    Instance inst;
    ParsedSol parsed;
    try {
        inst = parse_instance(read_file(opt.instance_path));
        parsed = parse_sol_text(read_file(opt.solution_path));
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitParse;
    }
    const VariantSignature sig = classify(inst, hints_of(opt.common));
    const Rounding rounding = opt.common.rounding.value_or(default_rounding(inst));
    const DistanceMatrix dm = build_distance_matrix(inst, rounding);
    const Solution sol = attach_depots(parsed, inst, sig.flags, dm);

    FeasibilityReport report = check_solution(sol, inst, sig.flags, dm);
    for (const auto& route : sol.routes)
        for (int v : route.visits)
            if (v < 1 || v > inst.dimension) {
                // No cost to recompute over unknown nodes.
                out << report.to_text();
                return kExitInfeasible;
            }
    const double recomputed = cost(sol, dm, sig.flags);
    if (parsed.cost) {
        const double stated = *parsed.cost;
        const double denom = std::max(1.0, std::fabs(recomputed));
        if (std::fabs(stated - recomputed) / denom > 1e-6) {
            report.feasible = false;
            report.violations.push_back(
                {ConstraintKind::Cost, -1, 0,
                 "cost mismatch: file says " + format_number(stated) + ", recomputed " +
                     format_number(recomputed)});
        }
    }
    out << report.to_text();
    out << "recomputed_cost " << format_number(recomputed) << "\n";
    return report.feasible ? kExitOk : kExitInfeasible;
}

int cmd_classify(const ClassifyOptions& opt, std::ostream& out, std::ostream& err) {
    Instance inst;
    try {
        inst = parse_instance(read_file(opt.instance_path));
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitParse;
    }
    const VariantSignature sig = classify(inst, hints_of(opt.common));
    out << "variant " << sig.code << "\n";
    const ConstraintSet& cs = sig.flags;
    for (const auto& [name, expl] : canonical_constraints(cs))
        out << "constraint " << name << ": " << expl << "\n";
    if (cs.capacity_on) out << "capacity " << format_number(cs.capacity) << "\n";
    if (cs.distance_limit_on)
        out << "distance_limit " << format_number(cs.distance_limit) << "\n";
    if (cs.electric_on) {
        out << "fuel_capacity " << format_number(cs.fuel_capacity) << "\n";
        out << "fuel_consumption_rate " << format_number(cs.fuel_consumption_rate) << "\n";
        out << "refuel_rate " << format_number(cs.refuel_rate) << "\n";
        out << "stations " << cs.stations.size() << "\n";
    }
    if (!sig.open_route_source.empty())
        out << "open_route_source " << sig.open_route_source << "\n";
    if (!sig.mixed_backhaul_source.empty())
        out << "mixed_backhaul_source " << sig.mixed_backhaul_source << "\n";
    for (const auto& note : sig.notes) out << "note " << note << "\n";
    for (const auto& warning : inst.warnings) err << "warning: " << warning << "\n";
    return kExitOk;
}

int cmd_bench(const BenchCliOptions& opt, std::ostream& out, std::ostream& err) {
    std::vector<std::pair<std::string, std::string>> texts;
    try {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(opt.directory)) {
            if (!entry.is_regular_file()) continue;
            const std::string ext = entry.path().extension().string();
            if (ext == ".vrp" || ext == ".tsp" || ext == ".atsp" || ext == ".sop" ||
                ext == ".evrp")
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) texts.emplace_back(f.stem().string(), read_file(f.string()));
    } catch (const std::exception& e) {
        err << "cannot scan '" << opt.directory << "': " << e.what() << "\n";
        return kExitParse;
    }
    if (texts.empty()) {
        err << "no instances under '" << opt.directory << "'\n";
        return kExitParse;
    }

    std::map<std::string, double> refs;
    if (!opt.reference_path.empty()) {
        try {
            refs = parse_reference_table(read_file(opt.reference_path));
        } catch (const ParseError& e) {
            err << "reference table: " << e.what() << "\n";
            return kExitParse;
        }
    }

    BenchOptions bench;
    bench.solver = opt.solver;
    bench.seeds = opt.seeds;
    bench.rounding = opt.common.rounding;
    bench.hints = hints_of(opt.common);
    bench.workers = opt.workers;
    const BenchReport report = run_bench(texts, refs, bench);
    out << report.table();
    if (!opt.csv_path.empty()) {
        try {
            write_file(opt.csv_path, report.csv());
            out << "csv " << opt.csv_path << "\n";
        } catch (const ConfigError& e) {
            err << e.what() << "\n";
            return kExitConfig;
        }
    }
    return kExitOk;
}

int cmd_pipeline(const PipelineCliOptions& opt, std::ostream& out, std::ostream& err) {
    std::string text;
    try {
        text = read_file(opt.instance_path);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitParse;
    }

    std::unique_ptr<Provider> provider;
    try {
        provider = make_provider(opt.provider);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    }

    Buffer buffer(opt.buffer_path);
    PipelineOptions pipeline_opts;
    pipeline_opts.provider = opt.provider;
    pipeline_opts.solver = opt.solver;
    pipeline_opts.hints = hints_of(opt.common);
    pipeline_opts.rounding = opt.common.rounding;

    PipelineResult result;
    try {
        result = run_pipeline(text, pipeline_opts, *provider, buffer);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitParse;
    }

    if (!opt.transcript_path.empty())
        write_file(opt.transcript_path, result.transcript.to_text());

    if (!result.success) {
        err << "pipeline failure: " << result.failure << "\n";
        err << "--- transcript ---\n" << result.transcript.to_text();
        return result.failure.rfind("solving failed", 0) == 0 ? kExitInfeasible : kExitConfig;
    }

    const std::string sol_path =
        opt.output_path.empty() ? default_output(opt.instance_path) : opt.output_path;
    write_file(sol_path, to_sol_text(result.solution, result.solution.cached_cost));
    out << "variant " << result.description.problem_type << "\n";
    out << "signature " << result.signature << "\n";
    out << "buffer_hit " << (result.buffer_hit ? 1 : 0) << "\n";
    out << "objective " << format_number(result.solution.cached_cost) << "\n";
    out << result.stats.to_text();
    out << "provider_time_s " << format_number(result.provider_time_s) << "\n";
    out << "solution " << sol_path << "\n";
    return kExitOk;
}

} // namespace vrpkit::cli
