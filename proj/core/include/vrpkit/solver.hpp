#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vrpkit/constraints.hpp"
#include "vrpkit/instance.hpp"
#include "vrpkit/rng.hpp"
#include "vrpkit/solution.hpp"

namespace vrpkit {

struct RemovalSet {
    std::vector<int> customers; // removal order preserved
};

struct SolverConfig {
    long iterations = 2000;     // improvement steps
    double destroy_ratio = 0.2; // fraction of customers removed per step
    std::uint64_t seed = 1;
    int max_subsequence = 5; // cap on one destroyed contiguous run
    std::optional<double> time_limit_s;
};

struct SearchStats {
    long steps = 0;
    long accepted = 0;
    double best_cost = 0.0;
    std::vector<double> best_trajectory; // best cost after each step
    double wall_time_s = 0.0;
    bool truncated = false;
    std::string to_text() const;
};

// Live state of one annealing run. best never costs more than current at an
// accepted step boundary, so its cost is nonincreasing over steps.
struct SearchState {
    Solution current;
    Solution best;
    long step = 0;
    Rng rng;
};

// Total travel distance: consecutive arcs per route, plus the return arc for
// closed variants. Station detours count as driven distance.
double cost(const Solution& sol, const DistanceMatrix& dm, const ConstraintSet& cs);

// Cooling schedule: (iterations - step + 1) / 10, reaching 0.1 at the last
// step. Throws std::out_of_range unless 1 <= step <= iterations.
double temperature(long iterations, long step);

// Always accepts improvements; worsening moves pass with probability
// exp(-(e_new - e_current) / temp), one uniform draw.
bool accept(double e_new, double e_current, double temp, Rng& rng);

// Greedy construction: extend the route with the nearest customer that keeps
// it feasible, closing and reopening routes (at the nearest workable depot)
// when nothing fits. Throws ConstructionError when some customer cannot be
// served even alone.
Solution initial_solution(const Instance& inst, const ConstraintSet& cs,
                          const DistanceMatrix& dm, Rng& rng);

// Removes ~ratio of the customers: sample a center, walk customers by
// distance to it, and cut one random contiguous subsequence out of each
// not-yet-destroyed route encountered, until enough customers are removed.
// Station stops inside a cut are dropped, not returned for reinsertion.
std::pair<RemovalSet, Solution> destroy(const Solution& sol, const Instance& inst,
                                        const ConstraintSet& cs, const DistanceMatrix& dm,
                                        double ratio, int max_subsequence, Rng& rng);

// Reinserts removed customers in shuffled order, each at the cheapest feasible
// position; falls back to station repair (electric) and then to opening a new
// route. The result is certified feasible before return.
Solution insert(Solution partial, const RemovalSet& removed, const Instance& inst,
                const ConstraintSet& cs, const DistanceMatrix& dm, Rng& rng);

// Full run: construction, then iterations of destroy / insert / validate /
// cost with simulated-annealing acceptance. Deterministic given cfg.seed.
std::pair<Solution, SearchStats> solve(const Instance& inst, const ConstraintSet& cs,
                                       const DistanceMatrix& dm, const SolverConfig& cfg);

// Re-tags every route with the cost-minimal feasible depot. A no-op for
// single-depot instances; keeps emitted .sol files (which carry no depot
// column) in agreement with validation.
void canonicalize_depots(Solution& sol, const Instance& inst, const ConstraintSet& cs,
                         const DistanceMatrix& dm);

} // namespace vrpkit
