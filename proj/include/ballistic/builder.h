#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ballistic/fusion.h"
#include "ballistic/graph_state.h"
#include "ballistic/rng.h"

namespace ballistic {

// Where the second slot of a fusion pair lives relative to the first.
enum class BondDirection { Local, X, Y, Z };

std::string to_string(BondDirection d);

struct SlotPair {
    int first = 0;
    int second = 0;
    BondDirection direction = BondDirection::Local;
    bool operator==(const SlotPair&) const = default;
};

// Static optical elements a photon passes; drives optical_depth_report.
struct OpticsModel {
    int source_elements = 4;
    int fusion_elements = 5;
    int crossing_elements = 1;
    int delay_elements = 1;
    int phase_shifter_elements = 1;
    int measurement_elements = 2;
};

struct UnitCellSpec {
    int sources_per_cell = 6;
    int photons_per_source = 3;
    int primal_slot = 1;
    int dual_slot = 4;
    std::vector<SlotPair> wiring;
    std::vector<int> crossing_slots;
    std::vector<int> delayed_slots;
    // Triples whose photons enter their fusions in the symmetric (triangle) frame.
    std::vector<int> symmetric_sources;
    // Probability that the six-single-photon circuit yields a GHZ triple.
    double ghz_success_probability = 1.0 / 32.0;
    OpticsModel optics;

    static UnitCellSpec default_cell();

    int slot_count() const { return sources_per_cell * photons_per_source; }
    int computational_photons() const { return 2; }
    // Fusions whose two photons both come from this cell (including the
    // photon handed to the next layer).
    int intra_fusions() const;
    // Photon slots fused with x or y neighbour cells.
    int boundary_slots() const;
    // Fusions attempted per cell in an infinite wafer.
    int fusions_per_cell() const;
    bool is_computational(int slot) const { return slot == primal_slot || slot == dual_slot; }

    // Throws SpecError describing the first violated invariant.
    void validate() const;
};

struct WaferSpec {
    int nx = 1;
    int ny = 1;
    int nz = 1;
    FusionParams fusion = FusionParams::defaults(FusionKind::BoostedTypeII);
    double photon_loss = 0.0;
    bool filter_enabled = false;
    double filter_fidelity = 1.0;

    void validate() const;
    std::size_t cell_count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
};

struct Coord {
    int x = 0;
    int y = 0;
    int z = 0;
    bool operator==(const Coord&) const = default;
};

struct ComputationalSite {
    Coord at;
    Vertex primal = 0;
    Vertex dual = 0;
};

struct FusionRecord {
    Vertex a = 0;
    Vertex b = 0;
    BondDirection direction = BondDirection::Local;
    FusionResult result = FusionResult::Failure;
};

struct ResourceReport {
    std::uint64_t photons_emitted = 0;
    std::uint64_t ancillas_consumed = 0;
    std::uint64_t fusions_attempted = 0;
    std::uint64_t computational_qubits = 0;
    std::uint64_t surviving_computational = 0;
    double photons_per_qubit_no_ancilla = 0;
    double photons_per_qubit_with_ancilla = 0;
    double photons_per_surviving_qubit = 0;
    // Single photons needed per GHZ triple at the configured source success rate.
    double single_photons_per_ghz = 0;
};

struct BuiltLattice {
    GraphRegister graph;
    int nx = 0, ny = 0, nz = 0;
    std::vector<ComputationalSite> sites;
    std::vector<Coord> coord;  // per vertex
    std::vector<FusionRecord> fusion_log;
    // Computational photons lost in flight; still alive in `graph` until
    // removed by remove_lost or punch_out.
    std::vector<Vertex> lost;
    ResourceReport resources;
};

// Appends a 3-vertex linear cluster, returns its first id.
Vertex make_ghz3(GraphRegister& reg);

// Keeps the vertex with probability f, otherwise measures it in Z.
bool apply_plus_filter(GraphRegister& reg, Vertex v, double fidelity, CounterRng& rng);

BuiltLattice build_wafer(const WaferSpec& spec, const UnitCellSpec& cell, CounterRng& rng);

// Per-cell accounting in an unbounded wafer.
ResourceReport cell_resource_report(const UnitCellSpec& cell, const FusionParams& fusion);

struct OpticalDepthReport {
    std::vector<int> per_slot;
    std::vector<int> crossings_per_slot;
    std::vector<int> active_per_slot;
    int max_depth = 0;
    double mean_depth = 0;
};

OpticalDepthReport optical_depth_report(const UnitCellSpec& cell);

// Transmission 10^(-dB/10) for a loss quoted in dB.
double db_to_transmission(double loss_db);
// Loss probability of a photon crossing `metres` of waveguide at `db_per_metre`.
double delay_line_loss(double db_per_metre, double metres);

// cellspec v1 (JSON).
UnitCellSpec parse_cell_spec(std::string_view json_text);
std::string cell_spec_to_json(const UnitCellSpec& cell);
UnitCellSpec load_cell_spec(const std::string& path);

// CSV side table: x,y,z,primal_id,dual_id.
std::string computational_sites_csv(const BuiltLattice& lattice);

}  // namespace ballistic
