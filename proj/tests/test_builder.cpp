#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ballistic/builder.h"
#include "ballistic/errors.h"
#include "ballistic/graph_oracle.h"
#include "ballistic/percolation.h"

using namespace ballistic;

namespace {

WaferSpec wafer(int nx, int ny, int nz, double lambda = 0.75) {
    WaferSpec w;
    w.nx = nx;
    w.ny = ny;
    w.nz = nz;
    w.fusion.success_prob = lambda;
    return w;
}

bool is_computational(const BuiltLattice& l, Vertex v) {
    for (const auto& s : l.sites) {
        if (s.primal == v || s.dual == v) {
            return true;
        }
    }
    return false;
}

std::string default_json() { return cell_spec_to_json(UnitCellSpec::default_cell()); }

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
    auto pos = s.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST(make_ghz3, appends_linear_triple) {
    GraphRegister g;
    Vertex v = make_ghz3(g);
    EXPECT_EQ(v, 0u);
    EXPECT_EQ(g.vertex_count(), 3u);
    std::vector<std::pair<Vertex, Vertex>> want{{0, 1}, {1, 2}};
    EXPECT_EQ(g.edges(), want);
}

TEST(make_ghz3, matches_dense_linear_cluster) {
    GraphRegister g(2);
    make_ghz3(g);
    DenseStabilizerState d(5);
    for (std::size_t q = 0; q < 5; ++q) {
        d.h(q);
    }
    d.cz(2, 3);
    d.cz(3, 4);
    EXPECT_TRUE(to_dense(g).same_state(d));
}

TEST(unit_cell, default_counts) {
    auto c = UnitCellSpec::default_cell();
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.slot_count(), 18);
    EXPECT_EQ(c.computational_photons(), 2);
    EXPECT_EQ(c.fusions_per_cell(), 8);
    EXPECT_EQ(c.intra_fusions(), 6);
    EXPECT_EQ(c.boundary_slots(), 4);
    std::vector<int> uses(18, 0);
    for (const auto& p : c.wiring) {
        ++uses[static_cast<std::size_t>(p.first)];
        ++uses[static_cast<std::size_t>(p.second)];
    }
    for (int s = 0; s < 18; ++s) {
        EXPECT_EQ(uses[static_cast<std::size_t>(s)], c.is_computational(s) ? 0 : 1) << "slot " << s;
    }
}

TEST(unit_cell, validation_rejects_bad_wiring) {
    auto base = UnitCellSpec::default_cell();
    auto with_computational = base;
    with_computational.wiring[0].first = base.primal_slot;
    EXPECT_THROW(with_computational.validate(), SpecError);
    auto reused = base;
    reused.wiring[0].second = reused.wiring[1].second;
    EXPECT_THROW(reused.validate(), SpecError);
    auto missing = base;
    missing.wiring.pop_back();
    EXPECT_THROW(missing.validate(), SpecError);
    auto out_of_range = base;
    out_of_range.wiring[0].first = 18;
    EXPECT_THROW(out_of_range.validate(), SpecError);
    auto same_slot = base;
    same_slot.primal_slot = same_slot.dual_slot;
    EXPECT_THROW(same_slot.validate(), SpecError);
    auto bad_source = base;
    bad_source.symmetric_sources = {base.primal_slot / 3};
    EXPECT_THROW(bad_source.validate(), SpecError);
}

TEST(unit_cell, rejected_before_sampling) {
    auto cell = UnitCellSpec::default_cell();
    cell.wiring.pop_back();
    CounterRng rng(5);
    auto before = rng.counter();
    EXPECT_THROW(build_wafer(wafer(2, 2, 2), cell, rng), SpecError);
    EXPECT_EQ(rng.counter(), before);
    auto w = wafer(0, 2, 2);
    EXPECT_THROW(build_wafer(w, UnitCellSpec::default_cell(), rng), SpecError);
    w = wafer(2, 2, 2);
    w.photon_loss = 1.0;
    EXPECT_THROW(build_wafer(w, UnitCellSpec::default_cell(), rng), SpecError);
}

TEST(cellspec_json, round_trip) {
    auto c = UnitCellSpec::default_cell();
    auto back = parse_cell_spec(cell_spec_to_json(c));
    ASSERT_EQ(back.wiring.size(), c.wiring.size());
    for (std::size_t i = 0; i < c.wiring.size(); ++i) {
        EXPECT_EQ(back.wiring[i].first, c.wiring[i].first);
        EXPECT_EQ(back.wiring[i].second, c.wiring[i].second);
        EXPECT_EQ(back.wiring[i].direction, c.wiring[i].direction);
    }
    EXPECT_EQ(back.crossing_slots, c.crossing_slots);
    EXPECT_EQ(back.delayed_slots, c.delayed_slots);
    EXPECT_EQ(back.symmetric_sources, c.symmetric_sources);
    EXPECT_EQ(cell_spec_to_json(back), cell_spec_to_json(c));
}

TEST(cellspec_json, rejects_malformed_documents) {
    auto j = default_json();
    EXPECT_THROW(parse_cell_spec("{"), SpecError);
    EXPECT_THROW(parse_cell_spec(replace_once(j, "cellspec v1", "cellspec v2")), SpecError);
    EXPECT_THROW(parse_cell_spec(replace_once(j, "\"optics\"", "\"optix\"")), SpecError);
    EXPECT_THROW(parse_cell_spec(replace_once(j, "\"dir\": \"x\"", "\"dir\": \"w\"")), SpecError);
    EXPECT_THROW(load_cell_spec("/nonexistent/cell.json"), SpecError);
}

TEST(cellspec_json, ghz_success_probability_from_config) {
    auto j = default_json();
    auto c = parse_cell_spec(j);
    EXPECT_DOUBLE_EQ(c.ghz_success_probability, 1.0 / 32.0);
    auto r = cell_resource_report(c, FusionParams::defaults(FusionKind::BoostedTypeII));
    EXPECT_DOUBLE_EQ(r.single_photons_per_ghz, 192.0);
    auto quarter = parse_cell_spec(replace_once(j, "\"ghz_success_probability\": 0.03125", "\"ghz_success_probability\": 0.25"));
    EXPECT_DOUBLE_EQ(cell_resource_report(quarter, FusionParams::defaults(FusionKind::BoostedTypeII)).single_photons_per_ghz,
                     24.0);
}

TEST(build_wafer, single_cell_deterministic_limit) {
    CounterRng rng(1);
    auto l = build_wafer(wafer(1, 1, 1, 1.0), UnitCellSpec::default_cell(), rng);
    ASSERT_EQ(l.sites.size(), 1u);
    Vertex p = l.sites[0].primal, d = l.sites[0].dual;
    EXPECT_TRUE(l.graph.alive(p));
    EXPECT_TRUE(l.graph.alive(d));
    EXPECT_EQ(l.graph.alive_count(), 2u);
    EXPECT_TRUE(l.graph.has_edge(p, d));
    EXPECT_EQ(count_components(l.graph), 1u);
    for (const auto& f : l.fusion_log) {
        EXPECT_EQ(f.result, FusionResult::Success);
    }
}

TEST(build_wafer, full_success_is_deterministic) {
    CounterRng a(1), b(99);
    auto la = build_wafer(wafer(3, 3, 3, 1.0), UnitCellSpec::default_cell(), a);
    auto lb = build_wafer(wafer(3, 3, 3, 1.0), UnitCellSpec::default_cell(), b);
    EXPECT_EQ(la.graph.edges(), lb.graph.edges());
    EXPECT_EQ(la.graph.alive_count(), 54u);
    for (Vertex v = 0; v < la.graph.vertex_count(); ++v) {
        if (la.graph.alive(v)) {
            EXPECT_TRUE(is_computational(la, v)) << v;
        }
    }
    EXPECT_EQ(count_components(la.graph), 1u);
}

TEST(build_wafer, fusion_log_and_photon_accounting) {
    for (double lambda : {0.5, 0.75, 1.0}) {
        CounterRng rng(3);
        auto w = wafer(4, 3, 5, lambda);
        w.photon_loss = 0.02;
        auto l = build_wafer(w, UnitCellSpec::default_cell(), rng);
        const std::uint64_t cells = w.cell_count();
        EXPECT_EQ(l.resources.fusions_attempted, l.fusion_log.size());
        EXPECT_EQ(l.resources.photons_emitted,
                  cells * 18 + l.fusion_log.size() * static_cast<std::uint64_t>(w.fusion.ancilla_cost));
        EXPECT_EQ(l.resources.computational_qubits, 2 * cells);
        for (const auto& f : l.fusion_log) {
            EXPECT_FALSE(is_computational(l, f.a));
            EXPECT_FALSE(is_computational(l, f.b));
        }
        for (Vertex v : l.lost) {
            EXPECT_TRUE(is_computational(l, v));
        }
    }
}

TEST(build_wafer, interior_fusion_count_matches_cell) {
    CounterRng rng(4);
    auto w = wafer(3, 4, 5, 1.0);
    auto l = build_wafer(w, UnitCellSpec::default_cell(), rng);
    // Full wafer minus the bonds that would cross the open boundaries.
    const std::size_t want = static_cast<std::size_t>(w.cell_count()) * 5 +
                             static_cast<std::size_t>((w.nx - 1) * w.ny * w.nz) +
                             static_cast<std::size_t>(w.nx * (w.ny - 1) * w.nz) +
                             static_cast<std::size_t>(w.nx * w.ny * (w.nz - 1));
    EXPECT_EQ(l.fusion_log.size(), want);
}

TEST(build_wafer, bond_retention_matches_eta_squared_lambda) {
    auto w = wafer(10, 10, 10, 0.75);
    w.fusion.transmission = 0.9;
    std::size_t attempts = 0, successes = 0;
    for (std::uint64_t t = 0; attempts < 100000; ++t) {
        CounterRng rng(21, t);
        auto l = build_wafer(w, UnitCellSpec::default_cell(), rng);
        for (const auto& f : l.fusion_log) {
            ++attempts;
            successes += f.result == FusionResult::Success;
        }
    }
    double p = expected_bond_probability(w.fusion);
    EXPECT_NEAR(p, 0.6075, 1e-12);
    double freq = static_cast<double>(successes) / static_cast<double>(attempts);
    EXPECT_NEAR(freq, p, 3 * std::sqrt(p * (1 - p) / static_cast<double>(attempts)));
}

TEST(build_wafer, same_seed_same_lattice) {
    auto w = wafer(4, 4, 6, 0.75);
    w.photon_loss = 0.01;
    w.filter_enabled = true;
    w.filter_fidelity = 0.95;
    CounterRng a(8, 2), b(8, 2);
    auto la = build_wafer(w, UnitCellSpec::default_cell(), a);
    auto lb = build_wafer(w, UnitCellSpec::default_cell(), b);
    EXPECT_EQ(la.graph.edges(), lb.graph.edges());
    EXPECT_EQ(la.lost, lb.lost);
    EXPECT_EQ(la.fusion_log.size(), lb.fusion_log.size());
}

TEST(build_wafer, sites_csv_side_table) {
    CounterRng rng(1);
    auto l = build_wafer(wafer(2, 1, 2, 1.0), UnitCellSpec::default_cell(), rng);
    auto csv = computational_sites_csv(l);
    EXPECT_EQ(csv.rfind("x,y,z,primal_id,dual_id\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    EXPECT_NE(csv.find("1,0,1,"), std::string::npos);
}

TEST(plus_filter, limits) {
    GraphRegister g(3);
    g.apply_cz(0, 1);
    g.apply_cz(1, 2);
    CounterRng rng(2);
    for (int i = 0; i < 100; ++i) {
        EXPECT_TRUE(apply_plus_filter(g, 1, 1.0, rng));
    }
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_FALSE(apply_plus_filter(g, 1, 0.0, rng));
    EXPECT_FALSE(g.alive(1));
    EXPECT_EQ(g.edge_count(), 0u);
    EXPECT_THROW(apply_plus_filter(g, 1, 0.5, rng), VertexStateError);
}

TEST(plus_filter, keep_rate) {
    CounterRng rng(3);
    GraphRegister g(20000);
    std::size_t kept = 0;
    for (Vertex v = 0; v < 20000; ++v) {
        kept += apply_plus_filter(g, v, 0.96, rng);
    }
    double sigma = std::sqrt(0.96 * 0.04 / 20000);
    EXPECT_NEAR(static_cast<double>(kept) / 20000, 0.96, 3 * sigma);
}

TEST(resources, default_cell_photons_per_qubit) {
    auto r = cell_resource_report(UnitCellSpec::default_cell(), FusionParams::defaults(FusionKind::BoostedTypeII));
    EXPECT_DOUBLE_EQ(r.photons_per_qubit_no_ancilla, 9.0);
    EXPECT_DOUBLE_EQ(r.photons_per_qubit_with_ancilla, 17.0);
    EXPECT_LE(r.photons_per_qubit_with_ancilla, 20.0);
    auto plain = cell_resource_report(UnitCellSpec::default_cell(), FusionParams::defaults(FusionKind::TypeII));
    EXPECT_DOUBLE_EQ(plain.photons_per_qubit_with_ancilla, 9.0);
}

TEST(resources, optical_depth) {
    auto c = UnitCellSpec::default_cell();
    auto rep = optical_depth_report(c);
    ASSERT_EQ(rep.per_slot.size(), 18u);
    EXPECT_LE(rep.max_depth, 12);
    for (int s = 0; s < 18; ++s) {
        auto i = static_cast<std::size_t>(s);
        EXPECT_LE(rep.crossings_per_slot[i], 1);
        EXPECT_EQ(rep.active_per_slot[i], c.is_computational(s) ? 1 : 0);
    }
    EXPECT_GT(rep.mean_depth, 0);
    EXPECT_LE(rep.mean_depth, rep.max_depth);
}

TEST(resources, decibel_conversion) {
    EXPECT_NEAR(db_to_transmission(10), 0.1, 1e-15);
    EXPECT_NEAR(db_to_transmission(0), 1.0, 1e-15);
    EXPECT_NEAR(delay_line_loss(0.01, 100), 1 - std::pow(10.0, -0.1), 1e-15);
    EXPECT_THROW(db_to_transmission(-1), SpecError);
    EXPECT_THROW(delay_line_loss(0.01, -1), SpecError);
}
