#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ballistic/graph_state.h"

namespace ballistic {

struct CrazyGraphSpec {
    int N = 1;            // columns
    int L = 1;            // qubits per column
    double loss = 0;      // per-qubit loss probability
    double z_flip = 0;    // per-qubit Z-flip probability

    void validate() const;
};

// Column c holds vertices c*L .. c*L + L - 1; adjacent columns are complete
// bipartite, columns carry no internal edges.
GraphRegister build_crazy_graph(const CrazyGraphSpec& spec);

// (1 - loss^L)^N. Survival does not depend on z_flip.
double teleport_success_prob(const CrazyGraphSpec& spec);

// Probability that a single column survives and its majority vote is wrong,
// with ties broken by a fair coin.
double column_flip_prob(int L, double loss, double z_flip);

struct TeleportEstimate {
    std::size_t trials = 0;
    std::size_t successes = 0;
    std::size_t flips = 0;      // successful trials with a wrong column vote
    std::size_t tie_votes = 0;  // column votes decided by the coin
    double success_rate = 0;
    double success_error = 0;
    double flip_rate = 0;  // flips / trials
    double flip_error = 0;
    double tie_rate = 0;  // tie_votes / (trials * N)
};

// Trial t draws from CounterRng(seed, t); column c of a trial uses its own
// split, so runs with different N, L or loss share random numbers.
TeleportEstimate simulate_teleport(const CrazyGraphSpec& spec, std::size_t trials, std::uint64_t seed,
                                   int threads = 0);

// Pre-built piece of cluster state with attachment points.
struct GadgetGraph {
    GraphRegister graph;
    std::vector<Vertex> inputs;
    std::vector<Vertex> outputs;
    std::vector<std::pair<Vertex, Pauli>> premeasure;
    std::vector<std::pair<Vertex, Pauli>> measure;  // measured after construction
};

// Edge-list text plus "# in: v..", "# out: v..", "# premeasure: v P" and
// "# measure: v P" annotations.
std::string gadget_to_text(const GadgetGraph& g);
GadgetGraph gadget_from_text(std::string_view text);
GadgetGraph load_gadget(const std::string& path);

// Column A (inputs) - centre c (Y premeasured) - column B (outputs), complete
// bipartite between neighbours.
GadgetGraph build_s_gadget(int L);

// False when a premeasured vertex is lost: the piece is discarded.
bool gadget_usable(const GadgetGraph& g, const std::vector<Vertex>& lost);

// Attaches the gadget between a one-qubit input wire and a readout qubit,
// X-measures wire and columns, and checks readout = P * S * input for all six
// Pauli eigenstates, with the same P for a given outcome record. Lost column
// vertices are left out. Returns false if the gadget is unusable.
bool verify_s_gadget(int L, const std::vector<Vertex>& lost = {}, std::uint64_t seed = 1);
// Same check for any gadget with a single premeasurement and any target gate.
bool verify_gadget_gate(const GadgetGraph& gadget, LocalClifford target, const std::vector<Vertex>& lost = {},
                        std::uint64_t seed = 1);

// Two hubs joined by an edge, hub x adjacent to column A, hub y to column B.
GadgetGraph fig6_hub_graph(int L);
// Degree-3 instance for L = 3: 4-cycles through each hub plus one cross edge.
GadgetGraph fig6_ring_graph();

// X-measures the marked vertices and tests local-complementation equivalence
// with a two-column crazy-graph block. Covers the ring instance when L = 3.
bool verify_fig6_equivalence(int L);
bool fig6_instance_matches(const GadgetGraph& left, int L);

}  // namespace ballistic
