#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vrpkit/bench.hpp"
#include "vrpkit/pipeline.hpp"

// Command implementations behind the vrpkit binary. Exit codes: 0 ok, 1 parse
// error, 2 infeasible, 3 internal defect, 4 configuration/provider error.
// A time-limit truncation with a feasible result stays 0 with a warning.
namespace vrpkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitDefect = 3;
inline constexpr int kExitConfig = 4;

struct CommonOptions {
    std::optional<bool> open_route;
    std::optional<bool> mixed_backhaul;
    std::optional<Rounding> rounding; // nullopt: per-instance convention
};

struct SolveOptions {
    std::string instance_path;
    CommonOptions common;
    SolverConfig solver;
    std::string output_path; // empty: <instance>.sol
};
int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err);

struct ValidateOptions {
    std::string instance_path;
    std::string solution_path;
    CommonOptions common;
};
int cmd_validate(const ValidateOptions& opt, std::ostream& out, std::ostream& err);

struct ClassifyOptions {
    std::string instance_path;
    CommonOptions common;
};
int cmd_classify(const ClassifyOptions& opt, std::ostream& out, std::ostream& err);

struct BenchCliOptions {
    std::string directory;
    std::string reference_path; // optional
    CommonOptions common;
    SolverConfig solver;
    std::vector<std::uint64_t> seeds{1};
    int workers = 1;
    std::string csv_path; // optional
};
int cmd_bench(const BenchCliOptions& opt, std::ostream& out, std::ostream& err);

struct PipelineCliOptions {
    std::string instance_path;
    CommonOptions common;
    SolverConfig solver;
    ProviderConfig provider;
    std::string buffer_path = "vrpkit_buffer.jsonl";
    std::string transcript_path; // optional dump
    std::string output_path;     // empty: <instance>.sol
};
int cmd_pipeline(const PipelineCliOptions& opt, std::ostream& out, std::ostream& err);

} // namespace vrpkit::cli
