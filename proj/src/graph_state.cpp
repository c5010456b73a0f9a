#include "ballistic/graph_state.h"

#include <algorithm>
#include <array>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "ballistic/dense_stabilizer.h"
#include "ballistic/errors.h"

namespace ballistic {

namespace {

// |G> = prod C_v |tau_a G>: right factors picked up by the vertex and its
// neighbours under local complementation at a.
LocalClifford lc_self_factor() { return LocalClifford::sqrt_x_dagger(); }
LocalClifford lc_neighbor_factor() { return LocalClifford::phase(); }

// For each vop, a word over {'a': complement at the vertex, 'n': complement at
// a neighbour} whose right factors multiply the vop to identity.
struct ReductionWords {
    std::array<std::string, LocalClifford::kCount> word;
    ReductionWords() {
        for (int start = 0; start < LocalClifford::kCount; ++start) {
            std::array<int, LocalClifford::kCount> prev{};
            std::array<char, LocalClifford::kCount> how{};
            prev.fill(-1);
            prev[start] = start;
            std::deque<int> queue{start};
            while (!queue.empty()) {
                int c = queue.front();
                queue.pop_front();
                const std::pair<char, LocalClifford> steps[] = {{'a', lc_self_factor()}, {'n', lc_neighbor_factor()}};
                for (auto [tag, f] : steps) {
                    int next = (LocalClifford::from_index(c) * f).index();
                    if (prev[next] < 0) {
                        prev[next] = c;
                        how[next] = tag;
                        queue.push_back(next);
                    }
                }
            }
            std::string w;
            for (int c = 0; c != start; c = prev[c]) {
                w += how[c];
            }
            std::reverse(w.begin(), w.end());
            word[start] = w;
        }
    }
};

const ReductionWords& reduction_words() {
    static const ReductionWords r;
    return r;
}

// Two-vertex CZ table: (edge, vop_a, vop_b) -> state after CZ, preferring
// results that keep a diagonal input vop diagonal.
struct CzEntry {
    std::uint8_t edge, a, b;
};

struct CzTable {
    std::array<CzEntry, 2 * 24 * 24> entry{};

    static std::size_t slot(int edge, int a, int b) { return static_cast<std::size_t>((edge * 24 + a) * 24 + b); }

    static DenseStabilizerState prepare(int edge, int a, int b) {
        DenseStabilizerState s(2);
        s.h(0);
        s.h(1);
        if (edge) {
            s.cz(0, 1);
        }
        s.apply(0, LocalClifford::from_index(a));
        s.apply(1, LocalClifford::from_index(b));
        return s;
    }

    CzTable() {
        std::unordered_map<std::string, std::vector<CzEntry>> by_state;
        for (int e = 0; e < 2; ++e) {
            for (int a = 0; a < 24; ++a) {
                for (int b = 0; b < 24; ++b) {
                    by_state[prepare(e, a, b).canonical_string()].push_back(
                        {static_cast<std::uint8_t>(e), static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)});
                }
            }
        }
        for (int e = 0; e < 2; ++e) {
            for (int a = 0; a < 24; ++a) {
                for (int b = 0; b < 24; ++b) {
                    auto s = prepare(e, a, b);
                    s.cz(0, 1);
                    const auto& candidates = by_state.at(s.canonical_string());
                    bool need_a = LocalClifford::from_index(a).is_diagonal();
                    bool need_b = LocalClifford::from_index(b).is_diagonal();
                    const CzEntry* pick = nullptr;
                    for (const auto& c : candidates) {
                        if ((!need_a || LocalClifford::from_index(c.a).is_diagonal()) &&
                            (!need_b || LocalClifford::from_index(c.b).is_diagonal())) {
                            pick = &c;
                            break;
                        }
                    }
                    if (pick == nullptr) {
                        throw std::logic_error("CZ table has no diagonal-preserving entry");
                    }
                    entry[slot(e, a, b)] = *pick;
                }
            }
        }
    }
};

const CzTable& cz_table() {
    static const CzTable t;
    return t;
}

bool insert_sorted(std::vector<Vertex>& v, Vertex x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) {
        v.erase(it);
        return false;
    }
    v.insert(it, x);
    return true;
}

}  // namespace

GraphRegister::GraphRegister(std::size_t vertex_count) { add_vertices(vertex_count); }

Vertex GraphRegister::add_vertex() { return add_vertices(1); }

Vertex GraphRegister::add_vertices(std::size_t count) {
    auto first = static_cast<Vertex>(adjacency_.size());
    std::size_t n = adjacency_.size() + count;
    adjacency_.resize(n);
    vop_.resize(n, 0);
    frame_.resize(n, Pauli::I);
    frame_known_.resize(n, 1);
    status_.resize(n, VertexStatus::Alive);
    alive_count_ += count;
    return first;
}

void GraphRegister::reserve(std::size_t vertex_count) {
    adjacency_.reserve(vertex_count);
    vop_.reserve(vertex_count);
    frame_.reserve(vertex_count);
    frame_known_.reserve(vertex_count);
    status_.reserve(vertex_count);
}

void GraphRegister::check_alive(Vertex v, const char* op) const {
    if (v >= status_.size()) {
        throw VertexStateError(std::string(op) + ": vertex " + std::to_string(v) + " out of range");
    }
    if (status_[v] != VertexStatus::Alive) {
        throw VertexStateError(std::string(op) + ": vertex " + std::to_string(v) + " is dead");
    }
}

VertexStatus GraphRegister::status(Vertex v) const {
    if (v >= status_.size()) {
        throw VertexStateError("status: vertex " + std::to_string(v) + " out of range");
    }
    return status_[v];
}

const std::vector<Vertex>& GraphRegister::neighbors(Vertex v) const {
    if (v >= adjacency_.size()) {
        throw VertexStateError("neighbors: vertex " + std::to_string(v) + " out of range");
    }
    return adjacency_[v];
}

bool GraphRegister::has_edge(Vertex a, Vertex b) const {
    const auto& n = neighbors(a);
    return std::binary_search(n.begin(), n.end(), b);
}

std::vector<std::pair<Vertex, Vertex>> GraphRegister::edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    out.reserve(edge_count_);
    for (Vertex u = 0; u < adjacency_.size(); ++u) {
        for (Vertex v : adjacency_[u]) {
            if (u < v) {
                out.emplace_back(u, v);
            }
        }
    }
    return out;
}

LocalClifford GraphRegister::vop(Vertex v) const {
    (void)neighbors(v);
    return LocalClifford::from_index(vop_[v]);
}

Pauli GraphRegister::frame(Vertex v) const {
    (void)neighbors(v);
    return frame_[v];
}

bool GraphRegister::frame_known(Vertex v) const {
    (void)neighbors(v);
    return frame_known_[v] != 0;
}

void GraphRegister::toggle_edge(Vertex a, Vertex b) {
    check_alive(a, "toggle_edge");
    check_alive(b, "toggle_edge");
    if (a == b) {
        throw VertexStateError("toggle_edge: self-loop on vertex " + std::to_string(a));
    }
    bool added = insert_sorted(adjacency_[a], b);
    insert_sorted(adjacency_[b], a);
    if (added) {
        ++edge_count_;
    } else {
        --edge_count_;
    }
}

void GraphRegister::set_dead(Vertex a, VertexStatus status) {
    for (Vertex b : adjacency_[a]) {
        auto& nb = adjacency_[b];
        nb.erase(std::lower_bound(nb.begin(), nb.end(), a));
    }
    edge_count_ -= adjacency_[a].size();
    adjacency_[a].clear();
    adjacency_[a].shrink_to_fit();
    status_[a] = status;
    --alive_count_;
}

void GraphRegister::consume(Vertex a) {
    check_alive(a, "consume");
    set_dead(a, VertexStatus::Measured);
}

void GraphRegister::apply_local(Vertex v, LocalClifford c) {
    check_alive(v, "apply_local");
    vop_[v] = static_cast<std::uint8_t>((c * LocalClifford::from_index(vop_[v])).index());
}

void GraphRegister::apply_pauli(Vertex v, Pauli p) {
    check_alive(v, "apply_pauli");
    Pauli inner = LocalClifford::from_index(vop_[v]).inverse().conjugate(p).pauli;
    frame_[v] = frame_[v] * inner;
}

void GraphRegister::local_complement(Vertex a) {
    check_alive(a, "local_complement");
    const std::vector<Vertex> nbrs = adjacency_[a];
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
            toggle_edge(nbrs[i], nbrs[j]);
        }
    }
    auto rewrite = [&](Vertex v, LocalClifford c) {
        vop_[v] = static_cast<std::uint8_t>((LocalClifford::from_index(vop_[v]) * c).index());
        frame_[v] = c.inverse().conjugate(frame_[v]).pauli;
    };
    rewrite(a, lc_self_factor());
    for (Vertex b : nbrs) {
        rewrite(b, lc_neighbor_factor());
    }
}

Vertex GraphRegister::other_neighbor(Vertex a, Vertex avoid) const {
    for (Vertex c : adjacency_[a]) {
        if (c != avoid) {
            return c;
        }
    }
    return a;
}

void GraphRegister::remove_vop(Vertex a, Vertex avoid) {
    Vertex c = other_neighbor(a, avoid);
    for (char step : reduction_words().word[vop_[a]]) {
        local_complement(step == 'a' ? a : c);
    }
}

void GraphRegister::normalize_frame(Vertex a) {
    if (!has_x(frame_[a])) {
        return;
    }
    frame_[a] = frame_[a] * Pauli::X;
    for (Vertex c : adjacency_[a]) {
        frame_[c] = frame_[c] * Pauli::Z;
    }
}

void GraphRegister::apply_cz(Vertex a, Vertex b) {
    check_alive(a, "apply_cz");
    check_alive(b, "apply_cz");
    if (a == b) {
        throw VertexStateError("apply_cz: operands coincide at vertex " + std::to_string(a));
    }
    if (other_neighbor(a, b) != a) {
        remove_vop(a, b);
    }
    if (other_neighbor(b, a) != b) {
        remove_vop(b, a);
    }
    if (other_neighbor(a, b) != a && !LocalClifford::from_index(vop_[a]).is_diagonal()) {
        remove_vop(a, b);
    }
    normalize_frame(a);
    normalize_frame(b);
    auto va = LocalClifford::from_index(vop_[a]);
    auto vb = LocalClifford::from_index(vop_[b]);
    if (va.is_diagonal() && vb.is_diagonal()) {
        toggle_edge(a, b);
        return;
    }
    va = va * LocalClifford::pauli(frame_[a]);
    vb = vb * LocalClifford::pauli(frame_[b]);
    frame_[a] = Pauli::I;
    frame_[b] = Pauli::I;
    bool edge = has_edge(a, b);
    const auto& e = cz_table().entry[CzTable::slot(edge ? 1 : 0, va.index(), vb.index())];
    if ((e.edge != 0) != edge) {
        toggle_edge(a, b);
    }
    vop_[a] = e.a;
    vop_[b] = e.b;
}

void GraphRegister::z_rule(Vertex a, bool flip_neighbors, VertexStatus status) {
    if (flip_neighbors) {
        for (Vertex c : adjacency_[a]) {
            frame_[c] = frame_[c] * Pauli::Z;
        }
    }
    set_dead(a, status);
}

int GraphRegister::measure_impl(Vertex a, Pauli basis, std::optional<int> forced, CounterRng* rng,
                                bool* deterministic) {
    check_alive(a, "measure_pauli");
    if (basis == Pauli::I) {
        throw VertexStateError("measure_pauli: identity is not a measurement basis");
    }
    for (;;) {
        auto v = LocalClifford::from_index(vop_[a]);
        SignedPauli q = v.inverse().conjugate(basis);
        bool sign_neg = q.negative ^ !commutes(frame_[a], q.pauli);
        if (q.pauli == Pauli::X) {
            if (adjacency_[a].empty()) {
                if (deterministic) {
                    *deterministic = true;
                }
                set_dead(a, VertexStatus::Measured);
                return sign_neg ? -1 : +1;
            }
            local_complement(adjacency_[a].front());
            continue;
        }
        if (q.pauli == Pauli::Y) {
            local_complement(a);
            continue;
        }
        if (deterministic) {
            *deterministic = false;
        }
        int outcome = forced ? *forced : (rng->bernoulli(0.5) ? -1 : +1);
        int graph_outcome = sign_neg ? -outcome : outcome;
        bool m = graph_outcome == -1;
        // Keep the dead vertex's single-qubit state representable as vop |+>.
        auto dead_vop = v * LocalClifford::pauli(frame_[a]) * LocalClifford::hadamard();
        if (m) {
            dead_vop = dead_vop * LocalClifford::pauli(Pauli::Z);
        }
        z_rule(a, m, VertexStatus::Measured);
        vop_[a] = static_cast<std::uint8_t>(dead_vop.index());
        frame_[a] = Pauli::I;
        return outcome;
    }
}

int GraphRegister::measure_pauli(Vertex a, Pauli basis, CounterRng& rng) {
    return measure_impl(a, basis, std::nullopt, &rng, nullptr);
}

int GraphRegister::measure_pauli_forced(Vertex a, Pauli basis, int outcome, bool* deterministic) {
    if (outcome != 1 && outcome != -1) {
        throw SpecError("forced outcome must be +1 or -1");
    }
    return measure_impl(a, basis, outcome, nullptr, deterministic);
}

void GraphRegister::remove_lost(Vertex a) {
    check_alive(a, "remove_lost");
    for (Vertex c : adjacency_[a]) {
        frame_known_[c] = 0;
    }
    z_rule(a, false, VertexStatus::Lost);
}

namespace {

using Rows = std::vector<std::uint32_t>;

struct RowsHash {
    std::size_t operator()(const Rows& r) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (auto x : r) {
            h = (h ^ x) * 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

Rows complement_at(const Rows& g, std::size_t a) {
    Rows out = g;
    std::uint32_t nb = g[a];
    for (std::size_t u = 0; u < g.size(); ++u) {
        if ((nb >> u) & 1u) {
            out[u] ^= nb & ~(1u << u);
        }
    }
    return out;
}

bool orbit_contains(const Rows& start, const Rows& target, std::size_t cap) {
    if (start == target) {
        return true;
    }
    std::unordered_set<Rows, RowsHash> seen{start};
    std::deque<Rows> queue{start};
    while (!queue.empty()) {
        Rows g = std::move(queue.front());
        queue.pop_front();
        for (std::size_t a = 0; a < g.size(); ++a) {
            if (g[a] == 0) {
                continue;
            }
            Rows h = complement_at(g, a);
            if (h == target) {
                return true;
            }
            if (seen.insert(h).second) {
                if (seen.size() > cap) {
                    throw CapacityError("lc_equivalent: orbit exceeds " + std::to_string(cap) + " graphs");
                }
                queue.push_back(std::move(h));
            }
        }
    }
    return false;
}

}  // namespace

bool lc_equivalent(const GraphRegister& g1, const GraphRegister& g2, std::size_t state_cap) {
    if (g1.alive_count() > kLcSearchMaxVertices || g2.alive_count() > kLcSearchMaxVertices) {
        throw CapacityError("lc_equivalent: more than " + std::to_string(kLcSearchMaxVertices) + " alive vertices");
    }
    std::vector<Vertex> alive;
    std::size_t n = std::max(g1.vertex_count(), g2.vertex_count());
    for (Vertex v = 0; v < n; ++v) {
        bool a1 = g1.alive(v);
        if (a1 != g2.alive(v)) {
            return false;
        }
        if (a1) {
            alive.push_back(v);
        }
    }
    std::unordered_map<Vertex, std::size_t> local;
    for (std::size_t i = 0; i < alive.size(); ++i) {
        local[alive[i]] = i;
    }
    auto rows_of = [&](const GraphRegister& g) {
        Rows r(alive.size(), 0);
        for (std::size_t i = 0; i < alive.size(); ++i) {
            for (Vertex w : g.neighbors(alive[i])) {
                r[i] |= 1u << local.at(w);
            }
        }
        return r;
    };
    Rows r1 = rows_of(g1), r2 = rows_of(g2);

    // Local complementation preserves connected components; search each alone.
    auto component_masks = [](const Rows& r) {
        std::vector<std::uint32_t> comps;
        std::uint32_t seen = 0;
        for (std::size_t s = 0; s < r.size(); ++s) {
            if ((seen >> s) & 1u) {
                continue;
            }
            std::uint32_t comp = 1u << s, frontier = comp;
            while (frontier) {
                std::uint32_t next = 0;
                for (std::size_t u = 0; u < r.size(); ++u) {
                    if ((frontier >> u) & 1u) {
                        next |= r[u];
                    }
                }
                frontier = next & ~comp;
                comp |= next;
            }
            seen |= comp;
            comps.push_back(comp);
        }
        return comps;
    };
    auto c1 = component_masks(r1), c2 = component_masks(r2);
    if (c1 != c2) {
        return false;
    }
    for (std::uint32_t comp : c1) {
        std::vector<std::size_t> idx;
        for (std::size_t u = 0; u < r1.size(); ++u) {
            if ((comp >> u) & 1u) {
                idx.push_back(u);
            }
        }
        auto restrict = [&](const Rows& r) {
            Rows out(idx.size(), 0);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                for (std::size_t j = 0; j < idx.size(); ++j) {
                    if ((r[idx[i]] >> idx[j]) & 1u) {
                        out[i] |= 1u << j;
                    }
                }
            }
            return out;
        };
        if (!orbit_contains(restrict(r1), restrict(r2), state_cap)) {
            return false;
        }
    }
    return true;
}

std::string to_edge_list(const GraphRegister& g) {
    std::ostringstream out;
    out << "graphstate v1 " << g.vertex_count() << '\n';
    for (auto [u, v] : g.edges()) {
        out << u << ' ' << v << '\n';
    }
    return out.str();
}

EdgeListDocument parse_edge_list(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    EdgeListDocument doc;
    bool header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        if (line[0] == '#') {
            doc.annotations.push_back(line);
            continue;
        }
        std::istringstream ls(line);
        if (!header) {
            std::string magic, version;
            long long n = -1;
            if (!(ls >> magic >> version >> n) || magic != "graphstate" || version != "v1" || n < 0) {
                throw SpecError("edge list line " + std::to_string(line_no) + ": expected 'graphstate v1 <n>'");
            }
            doc.graph = GraphRegister(static_cast<std::size_t>(n));
            header = true;
            continue;
        }
        long long u = -1, v = -1;
        std::string extra;
        if (!(ls >> u >> v) || (ls >> extra) || u < 0 || v < 0 ||
            static_cast<std::size_t>(std::max(u, v)) >= doc.graph.vertex_count() || u == v) {
            throw SpecError("edge list line " + std::to_string(line_no) + ": bad edge '" + line + "'");
        }
        if (doc.graph.has_edge(static_cast<Vertex>(u), static_cast<Vertex>(v))) {
            throw SpecError("edge list line " + std::to_string(line_no) + ": duplicate edge");
        }
        doc.graph.toggle_edge(static_cast<Vertex>(u), static_cast<Vertex>(v));
    }
    if (!header) {
        throw SpecError("edge list: missing 'graphstate v1 <n>' header");
    }
    return doc;
}

GraphRegister from_edge_list(std::string_view text) { return parse_edge_list(text).graph; }

}  // namespace ballistic
