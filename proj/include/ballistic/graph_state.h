#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ballistic/clifford.h"
#include "ballistic/rng.h"

namespace ballistic {

using Vertex = std::uint32_t;

enum class VertexStatus : std::uint8_t { Alive, Measured, Lost };

// Stabilizer state kept as vop * frame * |G>, with |G> the graph state of the
// adjacency. Frames are signless (global phase dropped) and never applied.
class GraphRegister {
   public:
    GraphRegister() = default;
    explicit GraphRegister(std::size_t vertex_count);

    Vertex add_vertex();
    // Appends `count` fresh |+> vertices, returns the first id.
    Vertex add_vertices(std::size_t count);
    void reserve(std::size_t vertex_count);

    std::size_t vertex_count() const { return adjacency_.size(); }
    std::size_t alive_count() const { return alive_count_; }
    std::size_t edge_count() const { return edge_count_; }
    bool alive(Vertex v) const { return v < status_.size() && status_[v] == VertexStatus::Alive; }
    VertexStatus status(Vertex v) const;
    const std::vector<Vertex>& neighbors(Vertex v) const;
    std::size_t degree(Vertex v) const { return neighbors(v).size(); }
    bool has_edge(Vertex a, Vertex b) const;
    std::vector<std::pair<Vertex, Vertex>> edges() const;

    LocalClifford vop(Vertex v) const;
    Pauli frame(Vertex v) const;
    bool frame_known(Vertex v) const;

    // Physical operations.
    void apply_local(Vertex v, LocalClifford c);
    void apply_pauli(Vertex v, Pauli p);
    void apply_cz(Vertex a, Vertex b);
    void local_complement(Vertex a);
    int measure_pauli(Vertex a, Pauli basis, CounterRng& rng);
    // Uses `outcome` whenever the result is random; a deterministic result is
    // returned as is. `deterministic` reports which case occurred.
    int measure_pauli_forced(Vertex a, Pauli basis, int outcome, bool* deterministic = nullptr);
    void remove_lost(Vertex a);

    // Adjacency-level primitives without state bookkeeping, for fusion rules.
    void toggle_edge(Vertex a, Vertex b);
    // Drops all edges of `a` and marks it measured; frames are left untouched.
    void consume(Vertex a);

   private:
    void check_alive(Vertex v, const char* op) const;
    void set_dead(Vertex a, VertexStatus status);
    void z_rule(Vertex a, bool flip_neighbors, VertexStatus status);
    int measure_impl(Vertex a, Pauli basis, std::optional<int> forced, CounterRng* rng, bool* deterministic);
    Vertex other_neighbor(Vertex a, Vertex avoid) const;
    void remove_vop(Vertex a, Vertex avoid);
    void normalize_frame(Vertex a);

    std::vector<std::vector<Vertex>> adjacency_;
    std::vector<std::uint8_t> vop_;
    std::vector<Pauli> frame_;
    std::vector<std::uint8_t> frame_known_;
    std::vector<VertexStatus> status_;
    std::size_t alive_count_ = 0;
    std::size_t edge_count_ = 0;
};

inline constexpr std::size_t kLcSearchMaxVertices = 20;

// True iff the adjacency of g2 is reachable from that of g1 by local
// complementations. Vertex ids must coincide; vops and frames are ignored.
bool lc_equivalent(const GraphRegister& g1, const GraphRegister& g2, std::size_t state_cap = 1u << 22);

// Edge-list text format. Lines beginning with '#' are annotations.
std::string to_edge_list(const GraphRegister& g);
struct EdgeListDocument {
    GraphRegister graph;
    std::vector<std::string> annotations;
};
EdgeListDocument parse_edge_list(std::string_view text);
GraphRegister from_edge_list(std::string_view text);

}  // namespace ballistic
