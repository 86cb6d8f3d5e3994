#include <benchmark/benchmark.h>

#include "generate.hpp"
#include "vrpkit/constraints.hpp"
#include "vrpkit/rng.hpp"
#include "vrpkit/solver.hpp"

using namespace vrpkit;

namespace {

struct Loaded {
    Instance inst;
    ConstraintSet cs;
    DistanceMatrix dm;
};

Loaded load(const std::string& code, int customers) {
    testgen::GenOptions opt;
    opt.customers = customers;
    opt.seed = 12345;
    Loaded l;
    l.inst = parse_instance(testgen::variant_instance_text(code, opt));
    l.cs = classify(l.inst).flags;
    l.dm = build_distance_matrix(l.inst, Rounding::None);
    return l;
}

void BM_parse(benchmark::State& state) {
    testgen::GenOptions opt;
    opt.customers = static_cast<int>(state.range(0));
    opt.seed = 7;
    const std::string text = testgen::variant_instance_text("CVRPTW", opt);
    for (auto _ : state) benchmark::DoNotOptimize(parse_instance(text));
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * text.size());
}
BENCHMARK(BM_parse)->Arg(50)->Arg(200);

void BM_distance_matrix(benchmark::State& state) {
    testgen::GenOptions opt;
    opt.customers = static_cast<int>(state.range(0));
    opt.seed = 7;
    const Instance inst = parse_instance(testgen::variant_instance_text("CVRP", opt));
    for (auto _ : state) benchmark::DoNotOptimize(build_distance_matrix(inst, Rounding::None));
}
BENCHMARK(BM_distance_matrix)->Arg(100)->Arg(400);

void BM_check_route(benchmark::State& state) {
    Loaded l = load("ECVRPLTW", static_cast<int>(state.range(0)));
    Rng rng(3);
    const Solution sol = initial_solution(l.inst, l.cs, l.dm, rng);
    const Route& longest = *std::max_element(
        sol.routes.begin(), sol.routes.end(),
        [](const Route& a, const Route& b) { return a.visits.size() < b.visits.size(); });
    for (auto _ : state) benchmark::DoNotOptimize(route_feasible(longest, l.inst, l.cs, l.dm));
}
BENCHMARK(BM_check_route)->Arg(50)->Arg(150);

void BM_destroy_insert(benchmark::State& state) {
    Loaded l = load("CVRPTW", static_cast<int>(state.range(0)));
    Rng rng(4);
    Solution sol = initial_solution(l.inst, l.cs, l.dm, rng);
    for (auto _ : state) {
        auto [removed, partial] = destroy(sol, l.inst, l.cs, l.dm, 0.2, 5, rng);
        benchmark::DoNotOptimize(insert(std::move(partial), removed, l.inst, l.cs, l.dm, rng));
    }
}
BENCHMARK(BM_destroy_insert)->Arg(50)->Arg(200);

void BM_solve_500(benchmark::State& state) {
    Loaded l = load("CVRP", static_cast<int>(state.range(0)));
    SolverConfig cfg;
    cfg.iterations = 500;
    cfg.seed = 11;
    for (auto _ : state) benchmark::DoNotOptimize(solve(l.inst, l.cs, l.dm, cfg));
}
BENCHMARK(BM_solve_500)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
