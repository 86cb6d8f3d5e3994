#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vrpkit/constraints.hpp"
#include "vrpkit/solver.hpp"

namespace vrpkit {

// gap = (objective - reference) / reference * 100, for positive references.
double gap_percent(double objective, double reference);

// Two-column "name objective" lines, '#' comments and blank lines skipped.
std::map<std::string, double> parse_reference_table(const std::string& text);

struct SeedRun {
    std::uint64_t seed = 0;
    double objective = 0.0;
    double wall_time_s = 0.0;
    bool feasible = false;
    bool runtime_error = false;
    std::string error;
};

struct BenchRow {
    std::string name;
    std::string variant;
    std::vector<SeedRun> runs;
    std::optional<double> best_objective; // best feasible across seeds
    std::optional<double> reference;
    std::optional<double> gap; // percent, absent without a reference
    double total_time_s = 0.0;
    bool feasible = false;      // some run produced a checked solution
    bool runtime_error = false; // every run crashed
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<std::string> warnings;
    double mean_objective = 0.0;
    double mean_gap = 0.0;
    double total_time_s = 0.0;
    double rer_percent = 0.0; // runs that crashed
    double sr_percent = 0.0;  // runs that produced a feasible, checked solution

    void finalize();
    std::string table() const; // column-aligned text
    std::string csv() const;   // one line per (instance, seed)
};

struct BenchOptions {
    SolverConfig solver;
    std::vector<std::uint64_t> seeds{1};
    std::optional<Rounding> rounding;
    VariantHints hints;
    int workers = 1;
};

// Solves every instance text under every seed (worker pool across instances),
// reporting best-of-seeds objectives against the reference table. Worker count
// never changes the numbers, only the schedule.
BenchReport run_bench(const std::vector<std::pair<std::string, std::string>>& named_texts,
                      const std::map<std::string, double>& references,
                      const BenchOptions& opts);

} // namespace vrpkit
