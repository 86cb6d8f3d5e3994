#include <doctest.h>

#include <cmath>
#include <set>

#include "generate.hpp"
#include "oracle.hpp"
#include "vrpkit/constraints.hpp"
#include "vrpkit/errors.hpp"
#include "vrpkit/solver.hpp"

using namespace vrpkit;

namespace {

struct Fixture {
    Instance inst;
    ConstraintSet cs;
    DistanceMatrix dm;
};

Fixture load(const std::string& code, int customers, std::uint64_t seed,
             bool generous_fuel = false) {
    testgen::GenOptions opt;
    opt.customers = customers;
    opt.seed = seed;
    opt.generous_fuel = generous_fuel;
    Fixture f;
    f.inst = parse_instance(testgen::variant_instance_text(code, opt));
    f.cs = classify(f.inst).flags;
    f.dm = build_distance_matrix(f.inst, Rounding::None);
    return f;
}

} // namespace

TEST_CASE("cost: empty, closed vs open, asymmetric direction") {
    const std::string text =
        "DIMENSION : 2\nNODE_COORD_SECTION\n1 0 0\n2 7 0\nDEPOT_SECTION\n1\n-1\nEOF\n";
    const Instance inst = parse_instance(text);
    const DistanceMatrix dm = build_distance_matrix(inst, Rounding::None);
    ConstraintSet closed, open;
    open.open_route = true;

    CHECK(cost(Solution{}, dm, closed) == 0.0);
    Solution one;
    one.routes.push_back({1, {2}});
    CHECK(cost(one, dm, closed) == 14.0);
    CHECK(cost(one, dm, open) == 7.0);

    const std::string atext =
        "DIMENSION : 3\nEDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\n"
        "EDGE_WEIGHT_SECTION\n0 2 9\n5 0 3\n4 8 0\nEOF\n";
    const DistanceMatrix adm =
        build_distance_matrix(parse_instance(atext), Rounding::None);
    Solution tour;
    tour.routes.push_back({1, {2, 3}});
    CHECK(cost(tour, adm, closed) == 2.0 + 3.0 + 4.0); // direction respected
}

TEST_CASE("temperature follows the linear-over-ten schedule") {
    CHECK(temperature(10000, 1) == 1000.0);
    CHECK(temperature(10000, 10000) == 0.1);
    CHECK(temperature(500, 251) == 25.0);
    CHECK_THROWS_AS(temperature(100, 0), std::out_of_range);
    CHECK_THROWS_AS(temperature(100, 101), std::out_of_range);
    for (long step = 2; step <= 100; ++step)
        CHECK(temperature(100, step) < temperature(100, step - 1));
}

TEST_CASE("acceptance: improvements always, worsenings at the annealing rate") {
    Rng rng(7);
    CHECK(accept(5.0, 9.0, 0.5, rng));
    CHECK(accept(9.0, 9.0, 0.5, rng));

    const auto rate = [&](double delta, double temp) {
        Rng local(123456);
        int yes = 0;
        for (int i = 0; i < 10000; ++i)
            if (accept(10.0 + delta, 10.0, temp, local)) ++yes;
        return yes / 10000.0;
    };
    // delta == temp: expect exp(-1) within 3 standard errors.
    const double p1 = std::exp(-1.0);
    CHECK(std::fabs(rate(2.0, 2.0) - p1) < 3.0 * std::sqrt(p1 * (1 - p1) / 10000.0) + 1e-12);
    // delta == 10 * temp: essentially never (at most a handful in 10k draws).
    CHECK(rate(20.0, 2.0) <= 5.0 / 10000.0);
}

TEST_CASE("initial solution: unconstrained fits one route, tight capacity splits") {
    Rng rng(1);
    const std::string loose =
        "DIMENSION : 4\nCAPACITY : 100\nNODE_COORD_SECTION\n1 0 0\n2 1 0\n3 2 0\n4 3 0\n"
        "DEMAND_SECTION\n1 0\n2 5\n3 5\n4 5\nDEPOT_SECTION\n1\n-1\nEOF\n";
    const Instance li = parse_instance(loose);
    const ConstraintSet lcs = classify(li).flags;
    const DistanceMatrix ldm = build_distance_matrix(li, Rounding::None);
    const Solution lsol = initial_solution(li, lcs, ldm, rng);
    CHECK(lsol.routes.size() == 1);
    CHECK(check_solution(lsol, li, lcs, ldm).feasible);

    const std::string tight =
        "DIMENSION : 4\nCAPACITY : 10\nNODE_COORD_SECTION\n1 0 0\n2 1 0\n3 2 0\n4 3 0\n"
        "DEMAND_SECTION\n1 0\n2 6\n3 6\n4 6\nDEPOT_SECTION\n1\n-1\nEOF\n";
    const Instance ti = parse_instance(tight);
    const Solution tsol = initial_solution(ti, classify(ti).flags,
                                           build_distance_matrix(ti, Rounding::None), rng);
    CHECK(tsol.routes.size() == 3);
}

TEST_CASE("initial solution stays within twice the brute-force optimum") {
    Rng rng(5);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Fixture f = load("CVRP", 5, 400 + seed);
        const Solution sol = initial_solution(f.inst, f.cs, f.dm, rng);
        const auto brute = oracle::brute_force_optimum(f.inst, f.cs, f.dm);
        REQUIRE(brute.found);
        CHECK(sol.cached_cost <= 2.0 * brute.optimum + 1e-9);
    }
}

TEST_CASE("construction failure names the unservable customer") {
    const std::string text =
        "DIMENSION : 2\nCAPACITY : 5\nNODE_COORD_SECTION\n1 0 0\n2 1 0\n"
        "DEMAND_SECTION\n1 0\n2 9\nDEPOT_SECTION\n1\n-1\nEOF\n";
    const Instance inst = parse_instance(text);
    Rng rng(1);
    CHECK_THROWS_AS(initial_solution(inst, classify(inst).flags,
                                     build_distance_matrix(inst, Rounding::None), rng),
                    ConstructionError);
}

TEST_CASE("destroy removes the expected count and partitions the customers") {
    Fixture f = load("CVRP", 10, 77);
    Rng rng(9);
    const Solution sol = initial_solution(f.inst, f.cs, f.dm, rng);

    // floor(10 * 0.2) = 2 targeted; overshoot bounded by the subsequence cap.
    auto [removed, residual] = destroy(sol, f.inst, f.cs, f.dm, 0.2, 5, rng);
    CHECK(removed.customers.size() >= 2);
    CHECK(removed.customers.size() <= 2 + 5 - 1);

    std::set<int> seen(removed.customers.begin(), removed.customers.end());
    CHECK(seen.size() == removed.customers.size());
    for (const Route& r : residual.routes)
        for (int v : r.visits) CHECK(seen.insert(v).second);
    for (int c : f.inst.customers()) CHECK(seen.count(c) == 1);
}

TEST_CASE("destroying a single-customer solution empties it") {
    const std::string text =
        "DIMENSION : 2\nCAPACITY : 5\nNODE_COORD_SECTION\n1 0 0\n2 1 0\n"
        "DEMAND_SECTION\n1 0\n2 3\nDEPOT_SECTION\n1\n-1\nEOF\n";
    const Instance inst = parse_instance(text);
    const ConstraintSet cs = classify(inst).flags;
    const DistanceMatrix dm = build_distance_matrix(inst, Rounding::None);
    Rng rng(3);
    const Solution sol = initial_solution(inst, cs, dm, rng);
    auto [removed, residual] = destroy(sol, inst, cs, dm, 0.5, 5, rng);
    CHECK(removed.customers == std::vector<int>{2});
    CHECK(residual.routes.empty());
}

TEST_CASE("destroy partition property over many random trials") {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const std::string code = trial % 2 ? "CVRPTW" : "MDCVRP";
        Fixture f = load(code, 8, 500 + trial);
        const Solution sol = initial_solution(f.inst, f.cs, f.dm, rng);
        const double rho = 0.05 + 0.5 * rng.next_double();
        auto [removed, residual] = destroy(sol, f.inst, f.cs, f.dm, rho, 5, rng);
        std::set<int> seen(removed.customers.begin(), removed.customers.end());
        CHECK(seen.size() == removed.customers.size());
        size_t residual_customers = 0;
        for (const Route& r : residual.routes)
            for (int v : r.visits)
                if (!f.inst.is_station(v)) {
                    CHECK(seen.insert(v).second);
                    ++residual_customers;
                }
        CHECK(seen.size() == f.inst.customers().size());
        CHECK(removed.customers.size() >= 1);
    }
}

TEST_CASE("insert: empty removal set returns the partial unchanged") {
    Fixture f = load("CVRP", 6, 88);
    Rng rng(2);
    const Solution sol = initial_solution(f.inst, f.cs, f.dm, rng);
    const Solution back = insert(sol, RemovalSet{}, f.inst, f.cs, f.dm, rng);
    CHECK(back.routes == sol.routes);
    CHECK(back.cached_cost == doctest::Approx(sol.cached_cost));
}

TEST_CASE("insert places a customer at the cheapest arc on a plain tour") {
    const std::string text =
        "DIMENSION : 4\nNODE_COORD_SECTION\n1 0 0\n2 10 0\n3 10 10\n4 9 1\n"
        "DEPOT_SECTION\n1\n-1\nEOF\n";
    const Instance inst = parse_instance(text);
    const ConstraintSet cs = classify(inst).flags;
    const DistanceMatrix dm = build_distance_matrix(inst, Rounding::None);
    Solution partial;
    partial.routes.push_back({1, {2, 3}});
    Rng rng(4);
    const Solution full = insert(partial, RemovalSet{{4}}, inst, cs, dm, rng);
    REQUIRE(full.routes.size() == 1);
    // Cheapest delta for node 4 is between depot and node 2.
    CHECK(full.routes[0].visits == std::vector<int>{4, 2, 3});
}

TEST_CASE("destroy-insert cycles preserve feasibility and customers") {
    Rng rng(55);
    for (int trial = 0; trial < 60; ++trial) {
        const char* codes[] = {"CVRP", "OCVRP", "CVRPTW", "CVRPB", "ECVRP", "MDCVRPL"};
        Fixture f = load(codes[trial % 6], 7, 700 + trial, true);
        Solution sol = initial_solution(f.inst, f.cs, f.dm, rng);
        for (int step = 0; step < 15; ++step) {
            auto [removed, residual] = destroy(sol, f.inst, f.cs, f.dm, 0.3, 5, rng);
            sol = insert(std::move(residual), removed, f.inst, f.cs, f.dm, rng);
            CHECK(check_solution(sol, f.inst, f.cs, f.dm).feasible);
            CHECK(oracle::feasible(sol, f.inst, f.cs, f.dm));
        }
    }
}

TEST_CASE("solve with zero iterations returns the greedy construction") {
    Fixture f = load("CVRP", 6, 91);
    SolverConfig cfg;
    cfg.iterations = 0;
    cfg.seed = 12;
    auto [sol, stats] = solve(f.inst, f.cs, f.dm, cfg);
    Rng rng(12);
    const Solution greedy = initial_solution(f.inst, f.cs, f.dm, rng);
    CHECK(sol.routes == greedy.routes);
    CHECK(stats.steps == 0);
}

TEST_CASE("identical seeds give identical solutions and trajectories") {
    Fixture f = load("CVRPTW", 7, 92);
    SolverConfig cfg;
    cfg.iterations = 300;
    cfg.seed = 777;
    auto [sol1, stats1] = solve(f.inst, f.cs, f.dm, cfg);
    auto [sol2, stats2] = solve(f.inst, f.cs, f.dm, cfg);
    CHECK(sol1.routes == sol2.routes);
    CHECK(stats1.best_trajectory == stats2.best_trajectory);
    CHECK(stats1.accepted == stats2.accepted);

    cfg.seed = 778;
    auto [sol3, stats3] = solve(f.inst, f.cs, f.dm, cfg);
    CHECK(stats3.best_trajectory.size() == stats1.best_trajectory.size());
}

TEST_CASE("best-cost trajectory never increases") {
    Fixture f = load("CVRPB", 7, 93);
    SolverConfig cfg;
    cfg.iterations = 400;
    cfg.seed = 5;
    auto [sol, stats] = solve(f.inst, f.cs, f.dm, cfg);
    for (size_t i = 1; i < stats.best_trajectory.size(); ++i)
        CHECK(stats.best_trajectory[i] <= stats.best_trajectory[i - 1] + 1e-12);
    CHECK(check_solution(sol, f.inst, f.cs, f.dm).feasible);
}

TEST_CASE("a short run reaches the brute-force optimum on a micro instance") {
    Fixture f = load("CVRP", 5, 94);
    const auto brute = oracle::brute_force_optimum(f.inst, f.cs, f.dm);
    REQUIRE(brute.found);
    SolverConfig cfg;
    cfg.iterations = 2000;
    cfg.seed = 31;
    auto [sol, stats] = solve(f.inst, f.cs, f.dm, cfg);
    CHECK(sol.cached_cost == doctest::Approx(brute.optimum).epsilon(1e-9));
}

TEST_CASE("seeded runs hit the optimum nearly always on micro instances") {
    int hits = 0, runs = 0;
    for (std::uint64_t inst_seed : {301ull, 302ull, 303ull}) {
        Fixture f = load("CVRPTW", 6, inst_seed);
        const auto brute = oracle::brute_force_optimum(f.inst, f.cs, f.dm);
        REQUIRE(brute.found);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            SolverConfig cfg;
            cfg.iterations = 2000;
            cfg.seed = seed;
            auto [sol, stats] = solve(f.inst, f.cs, f.dm, cfg);
            ++runs;
            if (sol.cached_cost <= brute.optimum + 1e-6 * brute.optimum) ++hits;
        }
    }
    CHECK(hits >= runs * 95 / 100);
}

TEST_CASE("time limit truncates but still returns a feasible best") {
    Fixture f = load("CVRP", 10, 95);
    SolverConfig cfg;
    cfg.iterations = 100000000;
    cfg.seed = 3;
    cfg.time_limit_s = 0.05;
    auto [sol, stats] = solve(f.inst, f.cs, f.dm, cfg);
    CHECK(stats.truncated);
    CHECK(stats.steps < cfg.iterations);
    CHECK(check_solution(sol, f.inst, f.cs, f.dm).feasible);
}

TEST_CASE("electric insertion adds a charging stop when a leg is too long") {
    // Reaching node 3 needs a recharge both ways: station->3->station is 201,
    // so a 250 battery works only with a stop before and after.
    const std::string text =
        "DIMENSION : 4\nCAPACITY : 10\nFUEL_CAPACITY : 250\nFUEL_CONSUMPTION_RATE : 1\n"
        "REFUEL_RATE : 2\nNODE_COORD_SECTION\n1 0 0\n2 100 0\n3 200 0\n4 100 10\n"
        "DEMAND_SECTION\n1 0\n2 1\n3 1\n4 0\nSTATION_SECTION\n4\nDEPOT_SECTION\n1\n-1\nEOF\n";
    const Instance inst = parse_instance(text);
    const ConstraintSet cs = classify(inst).flags;
    REQUIRE(cs.electric_on);
    const DistanceMatrix dm = build_distance_matrix(inst, Rounding::None);
    Rng rng(8);
    const Solution sol = initial_solution(inst, cs, dm, rng);
    CHECK(check_solution(sol, inst, cs, dm).feasible);
    bool uses_station = false;
    for (const Route& r : sol.routes)
        for (int v : r.visits) uses_station = uses_station || v == 4;
    CHECK(uses_station); // node 3 is unreachable without recharging
}

TEST_CASE("asymmetric tours respect arc direction end to end") {
    const std::string text = testgen::atsp_instance_text(9, 21);
    const Instance inst = parse_instance(text);
    const VariantSignature sig = classify(inst);
    CHECK(sig.code == "ATSP");
    const DistanceMatrix dm = build_distance_matrix(inst, Rounding::None);
    SolverConfig cfg;
    cfg.iterations = 500;
    cfg.seed = 9;
    auto [sol, stats] = solve(inst, sig.flags, dm, cfg);
    REQUIRE(sol.routes.size() == 1);
    double manual = 0.0;
    int prev = sol.routes[0].depot;
    for (int v : sol.routes[0].visits) {
        manual += dm.at(prev, v);
        prev = v;
    }
    manual += dm.at(prev, sol.routes[0].depot);
    CHECK(sol.cached_cost == doctest::Approx(manual));
}

TEST_CASE("precedence instances solve into a single consistent path") {
    const std::string text = testgen::sop_instance_text(8, 13);
    const Instance inst = parse_instance(text);
    const VariantSignature sig = classify(inst);
    REQUIRE(sig.code == "SOP");
    const DistanceMatrix dm = build_distance_matrix(inst, Rounding::None);
    SolverConfig cfg;
    cfg.iterations = 400;
    cfg.seed = 17;
    auto [sol, stats] = solve(inst, sig.flags, dm, cfg);
    CHECK(check_solution(sol, inst, sig.flags, dm).feasible);
    CHECK(oracle::feasible(sol, inst, sig.flags, dm));
}
