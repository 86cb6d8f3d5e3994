#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli.hpp"

using namespace vrpkit;

namespace {

struct CommonFlags {
    bool open = false;
    bool mixed = false;
    std::string rounding = "auto";
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_flag("--open", flags.open, "treat the instance as open-route");
    cmd->add_flag("--mixed-backhaul", flags.mixed,
                  "treat negative demands as mixed backhaul instead of strict");
    cmd->add_option("--rounding", flags.rounding,
                    "distance rounding: int, none, or auto (per-instance convention)")
        ->check(CLI::IsMember({"int", "none", "auto"}));
}

cli::CommonOptions resolve_common(const CommonFlags& flags) {
    cli::CommonOptions common;
    if (flags.open) common.open_route = true;
    if (flags.mixed) common.mixed_backhaul = true;
    if (flags.rounding == "int") common.rounding = Rounding::NearestInteger;
    if (flags.rounding == "none") common.rounding = Rounding::None;
    return common;
}

void add_solver(CLI::App* cmd, SolverConfig& solver, double& time_limit) {
    cmd->add_option("--iterations", solver.iterations, "improvement steps")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--rho", solver.destroy_ratio, "destroy ratio in (0,1)");
    cmd->add_option("--seed", solver.seed, "RNG seed");
    cmd->add_option("--max-subsequence", solver.max_subsequence,
                    "cap on one destroyed contiguous run");
    cmd->add_option("--time-limit", time_limit, "wall-clock cap in seconds");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vrpkit: VRPLIB parsing, variant classification, destroy-insert solving, "
                 "validation, benchmarking, and the agent pipeline"};
    app.require_subcommand(1);

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "solve one instance");
    cli::SolveOptions solve_opt;
    CommonFlags solve_common;
    double solve_time_limit = 0.0;
    solve_cmd->add_option("instance", solve_opt.instance_path, "VRPLIB instance file")
        ->required();
    solve_cmd->add_option("--output", solve_opt.output_path, "solution output path");
    add_common(solve_cmd, solve_common);
    add_solver(solve_cmd, solve_opt.solver, solve_time_limit);

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "check a solution file");
    cli::ValidateOptions validate_opt;
    CommonFlags validate_common;
    validate_cmd->add_option("instance", validate_opt.instance_path, "VRPLIB instance file")
        ->required();
    validate_cmd->add_option("solution", validate_opt.solution_path, "solution (.sol) file")
        ->required();
    add_common(validate_cmd, validate_common);

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "print the variant signature");
    cli::ClassifyOptions classify_opt;
    CommonFlags classify_common;
    classify_cmd->add_option("instance", classify_opt.instance_path, "VRPLIB instance file")
        ->required();
    add_common(classify_cmd, classify_common);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "solve a directory of instances");
    cli::BenchCliOptions bench_opt;
    CommonFlags bench_common;
    double bench_time_limit = 0.0;
    std::string seeds_text = "1";
    bench_cmd->add_option("dir", bench_opt.directory, "directory of instances")->required();
    bench_cmd->add_option("--reference", bench_opt.reference_path,
                          "two-column 'name objective' reference table");
    bench_cmd->add_option("--seeds", seeds_text, "comma-separated seed list");
    bench_cmd->add_option("--workers", bench_opt.workers, "parallel workers")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--csv", bench_opt.csv_path, "per-seed CSV output path");
    add_common(bench_cmd, bench_common);
    add_solver(bench_cmd, bench_opt.solver, bench_time_limit);

    // pipeline
    auto* pipeline_cmd = app.add_subcommand("pipeline", "run the agent pipeline end to end");
    cli::PipelineCliOptions pipeline_opt;
    CommonFlags pipeline_common;
    double pipeline_time_limit = 0.0;
    std::string provider_kind = "rule";
    pipeline_cmd->add_option("instance", pipeline_opt.instance_path, "VRPLIB instance file")
        ->required();
    pipeline_cmd->add_option("--provider", provider_kind, "rule or remote")
        ->check(CLI::IsMember({"rule", "remote"}));
    pipeline_cmd->add_option("--endpoint", pipeline_opt.provider.endpoint,
                             "chat-completion base URL (remote)");
    pipeline_cmd->add_option("--model", pipeline_opt.provider.model, "model name (remote)");
    pipeline_cmd->add_option("--key-env", pipeline_opt.provider.api_key_env,
                             "environment variable holding the API key (remote)");
    pipeline_cmd->add_option("--max-rounds", pipeline_opt.provider.max_rounds,
                             "cap on each agent loop")
        ->check(CLI::PositiveNumber);
    pipeline_cmd->add_option("--buffer", pipeline_opt.buffer_path, "variant buffer file");
    pipeline_cmd->add_option("--transcript", pipeline_opt.transcript_path,
                             "write the agent transcript here");
    pipeline_cmd->add_option("--output", pipeline_opt.output_path, "solution output path");
    add_common(pipeline_cmd, pipeline_common);
    add_solver(pipeline_cmd, pipeline_opt.solver, pipeline_time_limit);

    CLI11_PARSE(app, argc, argv);

    if (solve_cmd->parsed()) {
        solve_opt.common = resolve_common(solve_common);
        if (solve_time_limit > 0) solve_opt.solver.time_limit_s = solve_time_limit;
        return cli::cmd_solve(solve_opt, std::cout, std::cerr);
    }
    if (validate_cmd->parsed()) {
        validate_opt.common = resolve_common(validate_common);
        return cli::cmd_validate(validate_opt, std::cout, std::cerr);
    }
    if (classify_cmd->parsed()) {
        classify_opt.common = resolve_common(classify_common);
        return cli::cmd_classify(classify_opt, std::cout, std::cerr);
    }
    if (bench_cmd->parsed()) {
        bench_opt.common = resolve_common(bench_common);
        if (bench_time_limit > 0) bench_opt.solver.time_limit_s = bench_time_limit;
        bench_opt.seeds.clear();
        std::string tok;
        for (char c : seeds_text + ",") {
            if (c == ',') {
                if (!tok.empty()) bench_opt.seeds.push_back(std::stoull(tok));
                tok.clear();
            } else {
                tok.push_back(c);
            }
        }
        if (bench_opt.seeds.empty()) bench_opt.seeds = {1};
        return cli::cmd_bench(bench_opt, std::cout, std::cerr);
    }
    if (pipeline_cmd->parsed()) {
        pipeline_opt.common = resolve_common(pipeline_common);
        if (pipeline_time_limit > 0) pipeline_opt.solver.time_limit_s = pipeline_time_limit;
        pipeline_opt.provider.kind = provider_kind == "remote"
                                         ? ProviderConfig::Kind::Remote
                                         : ProviderConfig::Kind::RuleBased;
        return cli::cmd_pipeline(pipeline_opt, std::cout, std::cerr);
    }
    return cli::kExitConfig;
}
