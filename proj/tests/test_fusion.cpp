#include <gtest/gtest.h>

#include <cmath>

#include "ballistic/errors.h"
#include "ballistic/fusion.h"
#include "ballistic/graph_oracle.h"

using namespace ballistic;

namespace {

// Two 3-chains: 0-1-2 and 3-4-5.
GraphRegister two_chains() {
    GraphRegister g(6);
    g.apply_cz(0, 1);
    g.apply_cz(1, 2);
    g.apply_cz(3, 4);
    g.apply_cz(4, 5);
    return g;
}

}  // namespace

TEST(fuse, chain_ends_join_into_four_chain) {
    auto g = two_chains();
    CounterRng rng(1);
    auto out = fuse_with_result(g, 2, 3, FusionParams::defaults(FusionKind::TypeII), FusionResult::Success, rng);
    EXPECT_EQ(out.result, FusionResult::Success);
    EXPECT_FALSE(g.alive(2));
    EXPECT_FALSE(g.alive(3));
    std::vector<std::pair<Vertex, Vertex>> want{{0, 1}, {1, 4}, {4, 5}};
    EXPECT_EQ(g.edges(), want);
}

TEST(fuse, zero_success_probability_removes_both) {
    auto g = two_chains();
    CounterRng rng(2);
    auto p = FusionParams::defaults(FusionKind::TypeII);
    p.success_prob = 0;
    auto out = fuse(g, 2, 3, p, rng);
    EXPECT_EQ(out.result, FusionResult::Failure);
    EXPECT_FALSE(g.alive(2));
    EXPECT_FALSE(g.alive(3));
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_FALSE(g.has_edge(1, 4));
}

TEST(fuse, success_matches_dense_bell_measurement) {
    // Type-II success projects the pair onto X_a Z_b = +-1, Z_a X_b = +-1.
    CounterRng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng.below(9);
        GraphRegister g(n);
        for (Vertex u = 0; u < n; ++u) {
            for (Vertex v = u + 1; v < n; ++v) {
                if (rng.bernoulli(0.35)) {
                    g.apply_cz(u, v);
                }
            }
        }
        const Vertex a = 0, b = 1;
        if (g.has_edge(a, b)) {
            g.apply_cz(a, b);
        }
        auto d = to_dense(g);
        PauliString xz(n), zx(n);
        xz.ops[a] = Pauli::X;
        xz.ops[b] = Pauli::Z;
        zx.ops[a] = Pauli::Z;
        zx.ops[b] = Pauli::X;
        d.measure(xz, rng);
        d.measure(zx, rng);
        d.measure(a, Pauli::Z, rng);
        d.measure(b, Pauli::Z, rng);
        fuse_with_result(g, a, b, FusionParams::defaults(FusionKind::TypeII), FusionResult::Success, rng);
        auto e = to_dense(g);
        e.h(a);
        e.h(b);
        ASSERT_TRUE(e.same_state_up_to_pauli(d)) << "rep " << rep;
    }
}

TEST(fuse, linear_clusters_combine_on_dense_oracle) {
    CounterRng rng(4);
    for (std::size_t len1 = 1; len1 <= 5; ++len1) {
        for (std::size_t len2 = 1; len1 + len2 <= 10; ++len2) {
            GraphRegister g(len1 + len2);
            for (Vertex v = 0; v + 1 < len1; ++v) {
                g.apply_cz(v, v + 1);
            }
            for (Vertex v = static_cast<Vertex>(len1); v + 1 < len1 + len2; ++v) {
                g.apply_cz(v, v + 1);
            }
            Vertex a = static_cast<Vertex>(len1 - 1), b = static_cast<Vertex>(len1);
            fuse_with_result(g, a, b, FusionParams::defaults(FusionKind::TypeII), FusionResult::Success, rng);
            // Remaining vertices form a single chain of length len1 + len2 - 2.
            std::size_t expected_edges = len1 + len2 >= 4 ? len1 + len2 - 3 : 0;
            EXPECT_EQ(g.edge_count(), expected_edges);
            for (Vertex v = 0; v < len1 + len2; ++v) {
                if (g.alive(v)) {
                    EXPECT_LE(g.degree(v), 2u);
                }
            }
        }
    }
}

TEST(fuse, type1_transfers_neighbourhood) {
    auto g = two_chains();
    CounterRng rng(5);
    auto out = fuse_with_result(g, 2, 3, FusionParams::defaults(FusionKind::TypeI), FusionResult::Success, rng);
    EXPECT_EQ(out.result, FusionResult::Success);
    EXPECT_TRUE(g.alive(2));
    EXPECT_FALSE(g.alive(3));
    EXPECT_TRUE(g.has_edge(2, 4));
    EXPECT_TRUE(g.has_edge(1, 2));
}

TEST(fuse, success_frequency_matches_lambda) {
    CounterRng rng(6);
    auto p = FusionParams::defaults(FusionKind::BoostedTypeII);
    const int trials = 100000;
    int success = 0;
    GraphRegister g(2 * trials);
    for (int i = 0; i < trials; ++i) {
        auto out = fuse(g, 2 * i, 2 * i + 1, p, rng);
        success += out.result == FusionResult::Success;
        EXPECT_EQ(out.ancillas, 2);
    }
    double freq = static_cast<double>(success) / trials;
    EXPECT_NEAR(freq, 0.75, 3 * std::sqrt(0.75 * 0.25 / trials));
}

TEST(fuse, fused_vertices_always_dead) {
    CounterRng rng(7);
    for (int rep = 0; rep < 10000; ++rep) {
        std::size_t n = 3 + rng.below(6);
        GraphRegister g(n);
        for (Vertex u = 0; u < n; ++u) {
            for (Vertex v = u + 1; v < n; ++v) {
                if (rng.bernoulli(0.4)) {
                    g.apply_cz(u, v);
                }
            }
        }
        FusionParams p = FusionParams::defaults(FusionKind::TypeII);
        p.success_prob = rng.uniform01();
        p.transmission = 0.5 + 0.5 * rng.uniform01();
        Vertex a = static_cast<Vertex>(rng.below(n));
        Vertex b = static_cast<Vertex>((a + 1 + rng.below(n - 1)) % n);
        fuse(g, a, b, p, rng);
        ASSERT_FALSE(g.alive(a));
        ASSERT_FALSE(g.alive(b));
    }
}

TEST(fuse, loss_herald_frequency) {
    CounterRng rng(8);
    auto p = FusionParams::defaults(FusionKind::TypeII);
    p.transmission = 0.9;
    const int trials = 100000;
    int lost = 0;
    GraphRegister g(2 * trials);
    for (int i = 0; i < trials; ++i) {
        auto out = fuse(g, 2 * i, 2 * i + 1, p, rng);
        lost += out.result == FusionResult::LossHerald;
        if (out.result == FusionResult::LossHerald) {
            EXPECT_EQ(g.status(2 * i), VertexStatus::Lost);
        }
    }
    double q = 1 - 0.81;
    EXPECT_NEAR(static_cast<double>(lost) / trials, q, 3 * std::sqrt(q * (1 - q) / trials));
}

TEST(fuse, rejects_bad_operands) {
    GraphRegister g(3);
    CounterRng rng(9);
    auto p = FusionParams::defaults(FusionKind::TypeII);
    EXPECT_THROW(fuse(g, 1, 1, p, rng), VertexStateError);
    g.remove_lost(2);
    EXPECT_THROW(fuse(g, 0, 2, p, rng), VertexStateError);
    p.success_prob = 1.5;
    EXPECT_THROW(p.validate(), SpecError);
}

TEST(expected_bond_probability, values) {
    auto p = FusionParams::defaults(FusionKind::BoostedTypeII);
    EXPECT_DOUBLE_EQ(expected_bond_probability(p), 0.75);
    EXPECT_DOUBLE_EQ(expected_bond_probability(FusionParams::defaults(FusionKind::TypeII)), 0.5);
    p.transmission = 0.99;
    EXPECT_NEAR(expected_bond_probability(p), 0.735075, 1e-12);
}
