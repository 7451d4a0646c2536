#include <cdst/cd_solver.hpp>
#include <cdst/oracle.hpp>

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cdst;
using test::grid_instance;
using test::log_bound;

namespace {

std::vector<SolverConfig> configs() {
    std::vector<SolverConfig> out{SolverConfig::plain(), SolverConfig{}};
    SolverConfig d = SolverConfig::plain();
    d.discount_components = true;
    out.push_back(d);
    SolverConfig r = SolverConfig::plain();
    r.reposition_steiner = true;
    out.push_back(r);
    return out;
}

} // namespace

TEST(Formula, OptimalLambdaExamples) {
    EXPECT_EQ(optimal_lambda(3, 1, 0.25), std::make_pair(0.25, 0.75));
    EXPECT_EQ(optimal_lambda(2, 2, 0.25), std::make_pair(0.5, 0.5));
    EXPECT_EQ(optimal_lambda(1, 3, 0.0), std::make_pair(1.0, 0.0));
    EXPECT_THROW(optimal_lambda(1, 1, 0.6), ParameterError);
}

TEST(Formula, BetaExamples) {
    EXPECT_EQ(beta(1, 3, 2, 0.25), 3.0);
    for (double eta : {0.0, 0.1, 0.25, 0.5}) EXPECT_EQ(beta(1.5, 1.5, 4, eta), 6.0);
    EXPECT_EQ(beta(1, 7, 0, 0.3), 0.0);
    EXPECT_EQ(beta(1, 7, 2, 0.3), beta(7, 1, 2, 0.3));
}

TEST(Formula, MergePenaltyExamples) {
    ActiveSet a;
    a.terminals = {{0, 0, 1.0, TerminalOrigin::sink}, {1, 1, 3.0, TerminalOrigin::sink},
                   {2, 2, 1.0, TerminalOrigin::sink}, {3, 3, 1.0, TerminalOrigin::steiner},
                   {9, 4, 0.0, TerminalOrigin::root}};
    const auto& u = *a.find(0);
    EXPECT_EQ(merge_penalty(u, *a.find(1), a, 2, 0.25, false), 3.0);
    // Remaining active weight besides u: 3 + 1 + 1 = 5.
    EXPECT_EQ(merge_penalty(u, a.root(), a, 2, 0.25, false), 4.0);
    EXPECT_EQ(merge_penalty(u, a.root(), a, 2, 0.25, true), 3.5);
    EXPECT_THROW(merge_penalty(a.root(), u, a, 2, 0.25, false), ParameterError);
    const ActiveTerminal stranger{42, 0, 1.0, TerminalOrigin::sink};
    EXPECT_THROW(merge_penalty(stranger, u, a, 2, 0.25, false), ParameterError);
}

TEST(Solver, SingleSinkPathExample) {
    const auto g = test::path_graph(3, 1.0, 2.0);
    const NetInstance net{0, {{2, 3.0}}, 1.0, 0.5};
    for (const auto& cfg : configs()) {
        const auto t = solve(g, net, cfg);
        validate_tree(g, net, t);
        EXPECT_DOUBLE_EQ(t.cost.total, 14.0);
        EXPECT_DOUBLE_EQ(t.cost.connection_cost, 2.0);
    }
}

TEST(Solver, CoLocatedSinksAtRootCostNothing) {
    const auto g = test::path_graph(3, 1.0, 2.0);
    const NetInstance net{1, {{1, 2.0}, {1, 7.0}}, 0.0, 0.25};
    NetInstance penalized = net;
    penalized.d_bif = 3.0;
    for (const auto& cfg : configs()) {
        const auto t = solve(g, net, cfg);
        validate_tree(g, net, t);
        EXPECT_EQ(t.cost.total, 0.0);
        // With d_bif > 0 only the unavoidable bifurcation remains.
        const auto p = solve(g, penalized, cfg);
        EXPECT_EQ(p.cost.connection_cost, 0.0);
        EXPECT_DOUBLE_EQ(p.cost.total, beta(2.0, 7.0, 3.0, 0.25));
    }
}

TEST(Solver, UnreachableSinkExhausts) {
    const RoutingGraph g({{0, 0, 0}, {1, 0, 0}, {5, 5, 0}}, {{0, 1, 1.0, 1.0, 0}});
    const NetInstance net{0, {{1, 1.0}, {2, 1.0}}, 0.0, 0.5};
    for (const auto& cfg : configs()) EXPECT_THROW(solve(g, net, cfg), ExhaustionError);
}

TEST(Solver, Seed42RegressionAgainstOracle) {
    GridSpec s;
    s.seed = 42;
    s.width = 6;
    s.height = 6;
    s.layers = 2;
    s.sink_count = 3;
    const auto inst = generate_grid_instance(s);
    const double opt = exact_opt(inst.graph, inst.net).value;
    const auto t = solve(inst.graph, inst.net, SolverConfig::plain());
    validate_tree(inst.graph, inst.net, t);
    // Frozen from a pilot run.
    EXPECT_DOUBLE_EQ(opt, 23.0);
    EXPECT_DOUBLE_EQ(t.cost.total, 25.0);
    EXPECT_GE(t.cost.total, opt * (1 - 1e-9));
    EXPECT_LE(t.cost.total, log_bound(3) * opt);
}

TEST(Solver, IterationCountAndWeightConservation) {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const auto inst = grid_instance(seed, 2 + static_cast<int>(seed % 7), 6, 2, 1.0, 0.25);
        const auto& net = inst.net;
        for (const auto& cfg : configs()) {
            SolveTrace trace;
            trace.keep_snapshots = true;
            solve(inst.graph, net, cfg, &trace);
            ASSERT_EQ(trace.steps.size(), net.sinks.size());
            double total = 0.0;
            for (const auto& s : net.sinks) total += s.weight;
            double connected = 0.0;
            std::size_t expected_size = net.sinks.size() + 1;
            for (const auto& step : trace.steps) {
                const ActiveSet& a = *step.active_before;
                ASSERT_EQ(a.terminals.size(), expected_size);
                EXPECT_NEAR(a.sink_weight(), total - connected, 1e-9 * total);
                int roots = 0;
                for (const auto& t : a.terminals) {
                    roots += t.origin == TerminalOrigin::root;
                    if (t.origin != TerminalOrigin::root) { EXPECT_GT(t.weight, 0.0); }
                }
                EXPECT_EQ(roots, 1);
                if (step.root_merge) connected += a.find(step.u)->weight;
                --expected_size;
            }
            EXPECT_NEAR(connected, total, 1e-9 * total);
        }
    }
}

TEST(Solver, PairMinimalityAgainstReference) {
    for (std::uint64_t seed = 100; seed < 125; ++seed) {
        const int t = 2 + static_cast<int>(seed % 7);
        const auto inst = grid_instance(seed, t, 6, 2, seed % 2 ? 2.0 : 0.0, 0.25);
        SolveTrace trace;
        trace.keep_snapshots = true;
        solve(inst.graph, inst.net, SolverConfig::plain(), &trace);
        for (const auto& step : trace.steps) {
            const auto ref = pairwise_L_reference(inst.graph, *step.active_before, inst.net.d_bif, inst.net.eta);
            ASSERT_FALSE(ref.ordered.empty());
            const auto& best = ref.ordered.front();
            EXPECT_TRUE(relative_close(step.value, best.value, 1e-9)) << "seed " << seed << " iteration " << step.iteration;
            EXPECT_TRUE(is_reference_choice(ref, step.u, step.v, step.value, 1e-9))
                << "seed " << seed << " iteration " << step.iteration << " chose " << step.u << "->" << step.v;
        }
    }
}

TEST(Solver, DeterministicPerSeedAndAudited) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto inst = grid_instance(seed, 6, 8, 2, 1.5, 0.25);
        SolverConfig cfg;
        cfg.audit_hits = true;
        cfg.rng_seed = seed;
        SolveTrace t1;
        SolveTrace t2;
        const auto a = solve(inst.graph, inst.net, cfg, &t1);
        const auto b = solve(inst.graph, inst.net, cfg, &t2);
        validate_tree(inst.graph, inst.net, a);
        EXPECT_EQ(format_trace(t1), format_trace(t2));
        ASSERT_EQ(a.arcs.size(), b.arcs.size());
        for (std::size_t i = 0; i < a.arcs.size(); ++i) EXPECT_EQ(a.arcs[i].walk, b.arcs[i].walk);
        EXPECT_EQ(a.cost.total, b.cost.total);
    }
}

TEST(Solver, EveryConfigurationYieldsValidTrees) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = grid_instance(seed, 9, 8, 3, 2.0, 0.25);
        for (int mask = 0; mask < 32; ++mask) {
            SolverConfig cfg = SolverConfig::plain();
            cfg.discount_components = mask & 1;
            cfg.two_level_heap = mask & 2;
            cfg.astar = mask & 4;
            cfg.reposition_steiner = mask & 8;
            cfg.root_bonus = mask & 16;
            cfg.audit_hits = true;
            const auto t = solve(inst.graph, inst.net, cfg);
            validate_tree(inst.graph, inst.net, t);
            EXPECT_EQ(t.cost.total, evaluate_cost(inst.graph, inst.net, t).total);
        }
    }
}

TEST(Solver, HeapAndAstarLeaveTraceValuesUnchanged) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = grid_instance(seed, 7, 8, 2, 1.0, 0.25);
        SolveTrace base;
        solve(inst.graph, inst.net, SolverConfig::plain(), &base);
        for (int mask = 1; mask < 4; ++mask) {
            SolverConfig cfg = SolverConfig::plain();
            cfg.two_level_heap = mask & 1;
            cfg.astar = mask & 2;
            SolveTrace tr;
            solve(inst.graph, inst.net, cfg, &tr);
            ASSERT_EQ(tr.steps.size(), base.steps.size());
            for (std::size_t i = 0; i < tr.steps.size(); ++i) {
                EXPECT_TRUE(relative_close(tr.steps[i].value, base.steps[i].value, 1e-9));
            }
        }
    }
}

TEST(Solver, KruskalDegenerationBeatsMetricClosureMst) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto inst = grid_instance(seed, 3 + static_cast<int>(seed % 10), 8, 2);
        for (auto& s : inst.net.sinks) s.weight = 1e-15;
        SolverConfig cfg = SolverConfig::plain();
        cfg.discount_components = true;
        const auto t = solve(inst.graph, inst.net, cfg);
        EXPECT_LE(t.cost.connection_cost, metric_closure_mst(inst.graph, inst.net) * (1 + 1e-12)) << "seed " << seed;
    }
}

TEST(Solver, CostWithinLogBoundOfOracle) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const int t = 2 + static_cast<int>(seed % 3);
        const auto inst = grid_instance(seed, t, 6, 2, seed % 2 ? 2.0 : 0.0, 0.25);
        const double opt = exact_opt(inst.graph, inst.net).value;
        for (const auto& cfg : configs()) {
            const double c = solve(inst.graph, inst.net, cfg).cost.total;
            EXPECT_GE(c, opt * (1 - 1e-9));
            EXPECT_LE(c, log_bound(inst.net.sinks.size()) * opt * (1 + 1e-9));
        }
    }
}

TEST(SolveExpected, SingleTrialEqualsSolve) {
    const auto inst = grid_instance(5, 4);
    SolverConfig cfg;
    cfg.rng_seed = 77;
    const auto e = solve_expected(inst.graph, inst.net, cfg, 1);
    const double c = solve(inst.graph, inst.net, cfg).cost.total;
    EXPECT_EQ(e.mean, c);
    EXPECT_EQ(e.max, c);
    EXPECT_EQ(e.min, c);
    EXPECT_EQ(e.trials, 1);
    EXPECT_THROW(solve_expected(inst.graph, inst.net, cfg, 0), ParameterError);
}

TEST(SolveExpected, RootMergesOnlyAreDeterministic) {
    const auto inst = grid_instance(9, 1, 6, 2, 1.0, 0.25);
    const auto e = solve_expected(inst.graph, inst.net, SolverConfig::plain(), 10);
    EXPECT_EQ(e.max, e.mean);
    EXPECT_EQ(e.min, e.mean);
}

TEST(SolveExpected, MeanWithinLogBoundOfOracle) {
    const auto inst = grid_instance(2024, 4, 6, 2, 1.0, 0.25);
    const double opt = exact_opt(inst.graph, inst.net).value;
    const auto e = solve_expected(inst.graph, inst.net, SolverConfig::plain(), 20);
    EXPECT_GE(e.min, opt * (1 - 1e-9));
    EXPECT_LE(e.mean, log_bound(4) * opt);
    const auto again = solve_expected(inst.graph, inst.net, SolverConfig::plain(), 20);
    EXPECT_EQ(e.mean, again.mean);
}

TEST(Solver, SingleSinkMatchesShortestPathWhenNoBifurcationCost) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = grid_instance(seed, 1);
        const auto& s = inst.net.sinks[0];
        const auto dist = test::bellman_ford(inst.graph, inst.net.root, test::cd_length(inst.graph, s.weight));
        for (const auto& cfg : configs()) {
            const auto t = solve(inst.graph, inst.net, cfg);
            EXPECT_TRUE(relative_close(t.cost.total, dist[static_cast<std::size_t>(s.position)], 1e-12));
        }
    }
}
