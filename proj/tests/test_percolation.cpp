#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ballistic/errors.h"
#include "ballistic/percolation.h"

using namespace ballistic;

namespace {

WaferSpec wafer(int nx, int ny, int nz, double lambda) {
    WaferSpec w;
    w.nx = nx;
    w.ny = ny;
    w.nz = nz;
    w.fusion.success_prob = lambda;
    return w;
}

BuiltLattice build(int nx, int ny, int nz, double lambda, std::uint64_t seed, std::uint64_t stream = 0) {
    CounterRng rng(seed, stream);
    return build_wafer(wafer(nx, ny, nz, lambda), UnitCellSpec::default_cell(), rng);
}

GraphRegister chain(std::size_t n) {
    GraphRegister g(n);
    for (Vertex v = 0; v + 1 < n; ++v) {
        g.apply_cz(v, v + 1);
    }
    return g;
}

}  // namespace

TEST(union_find, merges_and_sizes) {
    UnionFind uf(6);
    EXPECT_TRUE(uf.unite(0, 1));
    EXPECT_TRUE(uf.unite(2, 3));
    EXPECT_TRUE(uf.unite(1, 3));
    EXPECT_FALSE(uf.unite(0, 2));
    EXPECT_EQ(uf.find(0), uf.find(3));
    EXPECT_NE(uf.find(0), uf.find(4));
    EXPECT_EQ(uf.set_size(2), 4u);
    EXPECT_EQ(uf.set_size(5), 1u);
}

TEST(crossing, full_and_empty_limits) {
    auto full = build(3, 3, 3, 1.0, 1);
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        EXPECT_TRUE(crossing_exists(full, a));
    }
    auto r = analyze(full);
    EXPECT_DOUBLE_EQ(r.largest_component_fraction, 1.0);
    EXPECT_EQ(r.components, 1u);
    auto empty = build(3, 3, 3, 0.0, 1);
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        EXPECT_FALSE(crossing_exists(empty, a));
    }
    auto re = analyze(empty);
    EXPECT_EQ(re.components, 54u);
    EXPECT_DOUBLE_EQ(re.largest_component_fraction, 1.0 / 54.0);
}

TEST(crossing, union_find_agrees_with_bfs) {
    std::size_t checked = 0, positives = 0;
    for (double lambda : {0.55, 0.65, 0.7, 0.75, 0.85}) {
        for (std::uint64_t t = 0; t < 12; ++t) {
            auto l = build(6, 5, 8, lambda, 17, t);
            ASSERT_LE(l.graph.vertex_count(), 10000u);
            for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
                bool uf = crossing_exists(l, a);
                EXPECT_EQ(uf, crossing_exists_bfs(l, a));
                positives += uf;
                ++checked;
            }
        }
    }
    EXPECT_GT(positives, 0u);
    EXPECT_LT(positives, checked);
}

TEST(crossing, monotone_in_bond_probability) {
    auto family = square_lattice_family(32);
    std::vector<SpanningEstimate> est;
    for (double p : {0.40, 0.45, 0.50, 0.55, 0.60}) {
        est.push_back(sample_crossing(family, p, 2000, 3, static_cast<std::uint64_t>(p * 100)));
    }
    for (std::size_t i = 1; i < est.size(); ++i) {
        double se = std::hypot(est[i].standard_error, est[i - 1].standard_error);
        EXPECT_GE(est[i].estimate + 3 * se, est[i - 1].estimate) << i;
    }
    EXPECT_LT(est.front().estimate, 0.2);
    EXPECT_GT(est.back().estimate, 0.8);
}

TEST(crossing, wafer_spans_in_z_at_three_quarters) {
    int spans = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        spans += crossing_exists(build(12, 6, 50, 0.75, 2024, t), Axis::Z);
    }
    EXPECT_GE(spans, 99);
}

TEST(spanning_estimate, standard_error_and_wilson) {
    auto e = spanning_estimate(30, 100);
    EXPECT_DOUBLE_EQ(e.estimate, 0.3);
    EXPECT_DOUBLE_EQ(e.standard_error, std::sqrt(0.3 * 0.7 / 100));
    EXPECT_LT(e.wilson_low, 0.3);
    EXPECT_GT(e.wilson_high, 0.3);
    auto all = spanning_estimate(100, 100);
    EXPECT_DOUBLE_EQ(all.standard_error, 0.0);
    EXPECT_DOUBLE_EQ(all.wilson_high, 1.0);
    EXPECT_LT(all.wilson_low, 1.0);
}

TEST(sample_crossing, independent_of_thread_count) {
    auto family = square_lattice_family(24);
    auto one = sample_crossing(family, 0.5, 400, 9, 1, 1);
    auto four = sample_crossing(family, 0.5, 400, 9, 1, 4);
    EXPECT_EQ(one.successes, four.successes);
}

TEST(estimate_threshold, square_lattice_self_dual_point) {
    ThresholdOptions opt;
    opt.trials_per_probe = 1000;
    opt.tolerance = 0.01;
    opt.seed = 11;
    auto t = estimate_threshold(square_lattice_family(64), opt);
    EXPECT_LE(t.high - t.low, opt.tolerance);
    EXPECT_GE(t.estimate, 0.48);
    EXPECT_LE(t.estimate, 0.52);
}

TEST(estimate_threshold, diamond_lattice) {
    ThresholdOptions opt;
    opt.trials_per_probe = 400;
    opt.tolerance = 0.01;
    opt.seed = 12;
    auto t = estimate_threshold(diamond_lattice_family(16), opt);
    EXPECT_LE(t.high - t.low, opt.tolerance);
    EXPECT_NEAR(t.estimate, 0.389, 0.02);
}

TEST(estimate_threshold, degenerate_family_rejected) {
    ThresholdOptions opt;
    opt.trials_per_probe = 50;
    EXPECT_THROW(estimate_threshold(square_lattice_family(1), opt), SpecError);
    EXPECT_THROW(estimate_threshold([](double, CounterRng&) { return false; }, opt), SpecError);
    opt.trials_per_probe = 0;
    EXPECT_THROW(estimate_threshold(square_lattice_family(8), opt), SpecError);
}

TEST(estimate_threshold, iteration_cap_reports_numeric_error) {
    ThresholdOptions opt;
    opt.trials_per_probe = 50;
    opt.tolerance = 1e-9;
    opt.max_iterations = 3;
    try {
        estimate_threshold(square_lattice_family(8), opt);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("bracket"), std::string::npos);
    }
}

TEST(punch_out, isolated_vertex_needs_no_measurement) {
    GraphRegister g(3);
    g.apply_cz(0, 1);
    EXPECT_EQ(punch_out(g, {2}), 0u);
    EXPECT_FALSE(g.alive(2));
    EXPECT_EQ(g.edge_count(), 1u);
}

TEST(punch_out, interior_of_five_chain) {
    auto g = chain(5);
    EXPECT_EQ(punch_out(g, {2}), 2u);
    for (Vertex v : {1u, 2u, 3u}) {
        EXPECT_FALSE(g.alive(v));
    }
    EXPECT_TRUE(g.alive(0));
    EXPECT_TRUE(g.alive(4));
    EXPECT_EQ(g.edge_count(), 0u);
    EXPECT_EQ(count_components(g), 2u);
}

TEST(punch_out, component_growth_bounded_by_degree) {
    for (std::uint64_t t = 0; t < 10; ++t) {
        auto l = build(5, 4, 6, 0.85, 31, t);
        CounterRng pick(32, t);
        for (int k = 0; k < 6; ++k) {
            Vertex v = l.sites[pick.below(l.sites.size())].primal;
            if (!l.graph.alive(v)) {
                continue;
            }
            std::size_t before = count_components(l.graph);
            std::size_t deg = l.graph.degree(v);
            punch_out(l.graph, {v});
            EXPECT_LE(count_components(l.graph), before + deg);
        }
    }
}

TEST(punch_out, wafer_tolerates_one_percent_loss) {
    auto w = wafer(12, 6, 50, 0.75);
    w.photon_loss = 0.01;
    int spans = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        CounterRng rng(77, t);
        auto l = build_wafer(w, UnitCellSpec::default_cell(), rng);
        punch_out(l.graph, l.lost);
        spans += crossing_exists(l, Axis::Z);
    }
    EXPECT_GE(spans, 90);
}

TEST(pathfinding, full_lattice_unit_window) {
    auto l = build(3, 3, 12, 1.0, 1);
    auto o = find_paths_windowed(l, 1, 1);
    EXPECT_EQ(o.sustained_layers, 12);
    auto two = find_paths_windowed(l, 1, 2);
    EXPECT_EQ(two.sustained_layers, 12);
}

TEST(pathfinding, paths_are_alive_adjacent_and_disjoint) {
    for (std::uint64_t t = 0; t < 5; ++t) {
        auto l = build(6, 4, 30, 0.8, 41, t);
        auto o = find_paths_windowed(l, 5, 3);
        std::set<Vertex> seen;
        for (std::size_t w = 0; w < o.paths.size(); ++w) {
            const auto& p = o.paths[w];
            for (std::size_t i = 0; i < p.size(); ++i) {
                EXPECT_TRUE(l.graph.alive(p[i]));
                EXPECT_TRUE(seen.insert(p[i]).second) << "vertex reused " << p[i];
                if (i > 0) {
                    EXPECT_TRUE(l.graph.has_edge(p[i - 1], p[i]));
                }
            }
            if (!p.empty()) {
                EXPECT_EQ(l.coord[p.front()].z, 0);
                EXPECT_EQ(o.per_wire[w], l.coord[p.back()].z + 1);
            }
        }
        EXPECT_EQ(o.sustained_layers, *std::min_element(o.per_wire.begin(), o.per_wire.end()));
    }
}

TEST(pathfinding, full_lookahead_dominates) {
    for (std::uint64_t t = 0; t < 8; ++t) {
        auto l = build(6, 4, 40, 0.7, 51, t);
        int full = find_paths_windowed(l, l.nz, 1).sustained_layers;
        for (int w : {1, 2, 5, 10}) {
            EXPECT_GE(full, find_paths_windowed(l, w, 1).sustained_layers) << "seed " << t << " window " << w;
        }
    }
}

TEST(pathfinding, collapses_below_threshold) {
    double previous = 0;
    for (double lambda : {0.3, 0.45, 0.6}) {
        double total = 0;
        for (std::uint64_t t = 0; t < 20; ++t) {
            total += find_paths_windowed(build(8, 6, 60, lambda, 61, t), 15, 1).sustained_layers;
        }
        double mean = total / 20;
        if (lambda <= 0.45) {
            EXPECT_LE(mean, 5.0) << lambda;
        }
        EXPECT_GE(mean, previous) << lambda;
        previous = mean;
    }
}

TEST(pathfinding, rejects_bad_arguments) {
    auto l = build(2, 2, 2, 1.0, 1);
    EXPECT_THROW(find_paths_windowed(l, 0, 1), SpecError);
    EXPECT_THROW(find_paths_windowed(l, 3, 0), SpecError);
}
