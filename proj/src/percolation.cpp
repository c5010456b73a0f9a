#include "ballistic/percolation.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "ballistic/errors.h"

namespace ballistic {

UnionFind::UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0u);
}

std::size_t UnionFind::find(std::size_t x) {
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) {
        return false;
    }
    if (size_[a] < size_[b]) {
        std::swap(a, b);
    }
    parent_[b] = static_cast<std::uint32_t>(a);
    size_[a] += size_[b];
    return true;
}

namespace {

int coord_along(const Coord& c, Axis axis) {
    switch (axis) {
        case Axis::X: return c.x;
        case Axis::Y: return c.y;
        case Axis::Z: return c.z;
    }
    return 0;
}

int extent_along(const BuiltLattice& l, Axis axis) {
    switch (axis) {
        case Axis::X: return l.nx;
        case Axis::Y: return l.ny;
        case Axis::Z: return l.nz;
    }
    return 0;
}

UnionFind lattice_components(const GraphRegister& g) {
    UnionFind uf(g.vertex_count());
    for (Vertex u = 0; u < g.vertex_count(); ++u) {
        for (Vertex v : g.neighbors(u)) {
            if (u < v) {
                uf.unite(u, v);
            }
        }
    }
    return uf;
}

bool crossing_from(const BuiltLattice& l, Axis axis, UnionFind& uf) {
    const int top = extent_along(l, axis) - 1;
    std::vector<std::uint8_t> touches(l.graph.vertex_count(), 0);
    for (Vertex v = 0; v < l.graph.vertex_count(); ++v) {
        if (!l.graph.alive(v)) {
            continue;
        }
        int c = coord_along(l.coord[v], axis);
        std::uint8_t flag = static_cast<std::uint8_t>((c == 0 ? 1 : 0) | (c == top ? 2 : 0));
        if (flag) {
            touches[uf.find(v)] |= flag;
        }
    }
    return std::any_of(touches.begin(), touches.end(), [](std::uint8_t f) { return f == 3; });
}

}  // namespace

bool crossing_exists(const BuiltLattice& lattice, Axis axis) {
    auto uf = lattice_components(lattice.graph);
    return crossing_from(lattice, axis, uf);
}

bool crossing_exists_bfs(const BuiltLattice& lattice, Axis axis) {
    const auto& g = lattice.graph;
    const int top = extent_along(lattice, axis) - 1;
    std::vector<std::uint8_t> seen(g.vertex_count(), 0);
    std::deque<Vertex> queue;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (g.alive(v) && coord_along(lattice.coord[v], axis) == 0) {
            seen[v] = 1;
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        Vertex u = queue.front();
        queue.pop_front();
        if (coord_along(lattice.coord[u], axis) == top) {
            return true;
        }
        for (Vertex w : g.neighbors(u)) {
            if (!seen[w]) {
                seen[w] = 1;
                queue.push_back(w);
            }
        }
    }
    return false;
}

std::size_t count_components(const GraphRegister& g) {
    auto uf = lattice_components(g);
    std::size_t n = 0;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (g.alive(v) && uf.find(v) == v) {
            ++n;
        }
    }
    return n;
}

PercolationReport analyze(const BuiltLattice& lattice) {
    PercolationReport r;
    auto uf = lattice_components(lattice.graph);
    std::size_t largest = 0;
    for (Vertex v = 0; v < lattice.graph.vertex_count(); ++v) {
        if (lattice.graph.alive(v) && uf.find(v) == v) {
            ++r.components;
            largest = std::max(largest, uf.set_size(v));
        }
    }
    std::size_t sites = 2 * lattice.sites.size();
    r.largest_component_fraction = sites == 0 ? 0.0 : static_cast<double>(largest) / static_cast<double>(sites);
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        r.crossing[static_cast<int>(a)] = crossing_from(lattice, a, uf);
    }
    return r;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) {
        return {0.0, 1.0};
    }
    double n = static_cast<double>(trials);
    double p = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double centre = (p + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

SpanningEstimate spanning_estimate(std::size_t successes, std::size_t trials, double z) {
    SpanningEstimate e;
    e.trials = trials;
    e.successes = successes;
    e.estimate = trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
    e.standard_error = trials == 0 ? 0.0 : std::sqrt(e.estimate * (1 - e.estimate) / static_cast<double>(trials));
    std::tie(e.wilson_low, e.wilson_high) = wilson_interval(successes, trials, z);
    return e;
}

LatticeFamily square_lattice_family(int side) {
    if (side < 1) {
        throw SpecError("square lattice side must be >= 1");
    }
    return [side](double p, CounterRng& rng) {
        const auto L = static_cast<std::size_t>(side);
        UnionFind uf(L * L);
        for (std::size_t y = 0; y < L; ++y) {
            for (std::size_t x = 0; x < L; ++x) {
                std::size_t i = y * L + x;
                if (x + 1 < L && rng.bernoulli(p)) {
                    uf.unite(i, i + 1);
                }
                if (y + 1 < L && rng.bernoulli(p)) {
                    uf.unite(i, i + L);
                }
            }
        }
        std::vector<std::uint8_t> touches(L * L, 0);
        for (std::size_t y = 0; y < L; ++y) {
            touches[uf.find(y * L)] |= 1;
        }
        for (std::size_t y = 0; y < L; ++y) {
            if (touches[uf.find(y * L + L - 1)] & 1) {
                return true;
            }
        }
        return false;
    };
}

LatticeFamily diamond_lattice_family(int side) {
    if (side < 1) {
        throw SpecError("diamond lattice side must be >= 1");
    }
    // Coordinates in units of a/4 inside [0, 4*side)^3. Sublattice A: even
    // coordinates with x+y+z = 0 mod 4; B = A + (1,1,1).
    struct Geometry {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> bonds;
        std::vector<std::uint32_t> low, high;
        std::size_t sites = 0;
    };
    auto geo = std::make_shared<Geometry>();
    const int n = 4 * side;
    std::vector<std::int32_t> id(static_cast<std::size_t>(n) * n * n, -1);
    auto at = [&](int x, int y, int z) -> std::int32_t& {
        return id[(static_cast<std::size_t>(z) * n + y) * n + x];
    };
    auto is_site = [](int x, int y, int z) {
        bool a = x % 2 == 0 && y % 2 == 0 && z % 2 == 0 && (x + y + z) % 4 == 0;
        bool b = x % 2 == 1 && y % 2 == 1 && z % 2 == 1 && (x + y + z - 3) % 4 == 0;
        return a || b;
    };
    for (int z = 0; z < n; ++z) {
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                if (is_site(x, y, z)) {
                    at(x, y, z) = static_cast<std::int32_t>(geo->sites++);
                    if (z <= 1) {
                        geo->low.push_back(static_cast<std::uint32_t>(at(x, y, z)));
                    }
                    if (z >= n - 2) {
                        geo->high.push_back(static_cast<std::uint32_t>(at(x, y, z)));
                    }
                }
            }
        }
    }
    const int d[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    for (int z = 0; z < n; z += 2) {
        for (int y = 0; y < n; y += 2) {
            for (int x = 0; x < n; x += 2) {
                if (!is_site(x, y, z)) {
                    continue;
                }
                for (const auto& s : d) {
                    int u = x + s[0], v = y + s[1], w = z + s[2];
                    if (u >= 0 && v >= 0 && w >= 0 && u < n && v < n && w < n) {
                        geo->bonds.emplace_back(static_cast<std::uint32_t>(at(x, y, z)),
                                                static_cast<std::uint32_t>(at(u, v, w)));
                    }
                }
            }
        }
    }
    return [geo](double p, CounterRng& rng) {
        UnionFind uf(geo->sites);
        for (auto [a, b] : geo->bonds) {
            if (rng.bernoulli(p)) {
                uf.unite(a, b);
            }
        }
        std::vector<std::uint8_t> touches(geo->sites, 0);
        for (auto v : geo->low) {
            touches[uf.find(v)] = 1;
        }
        for (auto v : geo->high) {
            if (touches[uf.find(v)]) {
                return true;
            }
        }
        return false;
    };
}

SpanningEstimate sample_crossing(const LatticeFamily& family, double p, std::size_t trials, std::uint64_t seed,
                                 std::uint64_t stream, int threads) {
    const CounterRng base(seed, stream);
    long long successes = 0;
    const auto n = static_cast<long long>(trials);
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : successes) num_threads(nt)
    for (long long t = 0; t < n; ++t) {
        CounterRng rng = base.split(static_cast<std::uint64_t>(t));
        successes += family(p, rng) ? 1 : 0;
    }
    return spanning_estimate(static_cast<std::size_t>(successes), trials);
}

ThresholdEstimate estimate_threshold(const LatticeFamily& family, const ThresholdOptions& options) {
    if (options.trials_per_probe == 0 || !(options.tolerance > 0)) {
        throw SpecError("estimate_threshold: trials_per_probe and tolerance must be positive");
    }
    ThresholdEstimate out;
    std::uint64_t stream = 0;
    auto probe = [&](double p, std::size_t trials) {
        auto e = sample_crossing(family, p, trials, options.seed, stream++, options.threads);
        auto [lo, hi] = wilson_interval(e.successes, e.trials, options.z);
        e.wilson_low = lo;
        e.wilson_high = hi;
        out.probes.push_back({p, e});
        return e;
    };
    auto at0 = probe(0.0, options.trials_per_probe);
    auto at1 = probe(1.0, options.trials_per_probe);
    if (at0.estimate >= 0.5 || at1.estimate <= 0.5) {
        std::ostringstream msg;
        msg << "estimate_threshold: degenerate family (crossing " << at0.estimate << " at p=0, " << at1.estimate
            << " at p=1)";
        throw SpecError(msg.str());
    }
    double lo = 0, hi = 1;
    int iterations = 0;
    while (hi - lo > options.tolerance) {
        if (++iterations > options.max_iterations) {
            std::ostringstream msg;
            msg << "estimate_threshold: no convergence after " << options.max_iterations << " iterations, bracket ["
                << lo << ", " << hi << "]";
            throw NumericError(msg.str());
        }
        double mid = 0.5 * (lo + hi);
        std::size_t trials = options.trials_per_probe;
        for (;;) {
            auto e = probe(mid, trials);
            if (e.wilson_high < 0.5) {
                lo = mid;
                break;
            }
            if (e.wilson_low > 0.5) {
                hi = mid;
                break;
            }
            if (trials * 2 <= options.trials_per_probe * options.max_trial_scale) {
                trials *= 2;
                continue;
            }
            (e.estimate < 0.5 ? lo : hi) = mid;
            break;
        }
    }
    out.low = lo;
    out.high = hi;
    out.estimate = 0.5 * (lo + hi);
    return out;
}

std::size_t punch_out(GraphRegister& reg, const std::vector<Vertex>& lost) {
    std::size_t measured = 0;
    for (Vertex v : lost) {
        if (!reg.alive(v)) {
            continue;
        }
        std::vector<Vertex> nbrs = reg.neighbors(v);
        reg.remove_lost(v);
        for (Vertex w : nbrs) {
            if (reg.alive(w)) {
                reg.measure_pauli_forced(w, Pauli::Z, +1);
                ++measured;
            }
        }
    }
    return measured;
}

namespace {

class WindowRouter {
   public:
    WindowRouter(const BuiltLattice& l, int window)
        : l_(l), window_(window), used_(l.graph.vertex_count(), 0), stamp_(l.graph.vertex_count(), 0),
          dist_(l.graph.vertex_count(), 0), prev_(l.graph.vertex_count(), 0) {}

    int layer(Vertex v) const { return l_.coord[v].z; }

    // Breadth-first search from `from` over unused alive vertices in layers
    // <= limit. Returns the farthest layer reached and fills `target`.
    int search(Vertex from, int limit, Vertex& target) {
        ++epoch_;
        std::deque<Vertex> queue{from};
        stamp_[from] = epoch_;
        dist_[from] = 0;
        target = from;
        int best = layer(from);
        while (!queue.empty()) {
            Vertex u = queue.front();
            queue.pop_front();
            int lu = layer(u);
            if (lu > best || (lu == best && (dist_[u] < dist_[target] || (dist_[u] == dist_[target] && u < target)))) {
                best = lu;
                target = u;
            }
            for (Vertex w : l_.graph.neighbors(u)) {
                if (stamp_[w] == epoch_ || used_[w] || layer(w) > limit) {
                    continue;
                }
                stamp_[w] = epoch_;
                dist_[w] = dist_[u] + 1;
                prev_[w] = u;
                queue.push_back(w);
            }
        }
        return best;
    }

    std::vector<Vertex> path_to(Vertex from, Vertex target) const {
        std::vector<Vertex> p;
        for (Vertex v = target; v != from; v = prev_[v]) {
            p.push_back(v);
        }
        std::reverse(p.begin(), p.end());
        return p;
    }

    bool start(std::vector<Vertex>& path) {
        Vertex best_v = 0;
        int best_reach = -1;
        Vertex t;
        for (Vertex v = 0; v < l_.graph.vertex_count(); ++v) {
            if (!l_.graph.alive(v) || used_[v] || layer(v) != 0) {
                continue;
            }
            int reach = search(v, window_, t);
            if (reach > best_reach) {
                best_reach = reach;
                best_v = v;
            }
        }
        if (best_reach < 0) {
            return false;
        }
        used_[best_v] = 1;
        path.push_back(best_v);
        return true;
    }

    // Advances the wire past its frontier layer; false when it cannot.
    bool step(std::vector<Vertex>& path, int& frontier) {
        Vertex head = path.back();
        Vertex target;
        int reach = search(head, frontier + window_, target);
        if (reach <= frontier) {
            return false;
        }
        for (Vertex v : path_to(head, target)) {
            used_[v] = 1;
            path.push_back(v);
            if (layer(v) > frontier) {
                frontier = layer(v);
                break;
            }
        }
        return true;
    }

   private:
    const BuiltLattice& l_;
    int window_;
    std::vector<std::uint8_t> used_;
    std::vector<std::uint32_t> stamp_;
    std::vector<std::uint32_t> dist_;
    std::vector<Vertex> prev_;
    std::uint32_t epoch_ = 0;
};

}  // namespace

PathfindingOutcome find_paths_windowed(const BuiltLattice& lattice, int window, int wires) {
    if (window < 1 || wires < 1) {
        throw SpecError("find_paths_windowed: window and wires must be >= 1");
    }
    PathfindingOutcome out;
    out.paths.resize(static_cast<std::size_t>(wires));
    out.per_wire.assign(static_cast<std::size_t>(wires), 0);
    WindowRouter router(lattice, window);
    std::vector<int> frontier(static_cast<std::size_t>(wires), 0);
    std::vector<std::uint8_t> live(static_cast<std::size_t>(wires), 0);
    for (std::size_t w = 0; w < live.size(); ++w) {
        live[w] = router.start(out.paths[w]);
        out.per_wire[w] = live[w] ? 1 : 0;
    }
    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t w = 0; w < live.size(); ++w) {
            if (!live[w] || frontier[w] + 1 >= lattice.nz) {
                continue;
            }
            if (router.step(out.paths[w], frontier[w])) {
                out.per_wire[w] = frontier[w] + 1;
                progress = true;
            } else {
                live[w] = 0;
            }
        }
    }
    out.sustained_layers = *std::min_element(out.per_wire.begin(), out.per_wire.end());
    return out;
}

}  // namespace ballistic
