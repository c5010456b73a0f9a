#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ballistic/builder.h"
#include "ballistic/graph_state.h"
#include "ballistic/rng.h"

namespace ballistic {

class UnionFind {
   public:
    explicit UnionFind(std::size_t n);
    std::size_t find(std::size_t x);
    // Returns true when two distinct sets were merged.
    bool unite(std::size_t a, std::size_t b);
    std::size_t set_size(std::size_t x) { return size_[find(x)]; }

   private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
};

enum class Axis { X = 0, Y = 1, Z = 2 };

struct PercolationReport {
    double largest_component_fraction = 0;  // relative to all computational sites
    bool crossing[3] = {false, false, false};
    std::size_t components = 0;             // among alive vertices
};

bool crossing_exists(const BuiltLattice& lattice, Axis axis);
// Breadth-first reference implementation of crossing_exists.
bool crossing_exists_bfs(const BuiltLattice& lattice, Axis axis);
PercolationReport analyze(const BuiltLattice& lattice);
std::size_t count_components(const GraphRegister& g);

struct SpanningEstimate {
    std::size_t trials = 0;
    std::size_t successes = 0;
    double estimate = 0;
    double standard_error = 0;  // sqrt(p(1-p)/trials)
    double wilson_low = 0;
    double wilson_high = 0;
};

SpanningEstimate spanning_estimate(std::size_t successes, std::size_t trials, double z = 3.0);

// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z);

// A family of random lattices indexed by bond probability; returns whether a
// sample crosses.
using LatticeFamily = std::function<bool(double p, CounterRng& rng)>;

// L x L sites, open boundaries, left-right crossing.
LatticeFamily square_lattice_family(int side);
// Diamond lattice in side^3 conventional cubic cells, crossing along z.
LatticeFamily diamond_lattice_family(int side);

struct ThresholdOptions {
    std::size_t trials_per_probe = 1000;
    double tolerance = 0.01;
    double z = 2.576;  // Wilson bracket confidence
    int max_iterations = 40;
    // A probe whose interval still straddles 1/2 is re-run with this many
    // times the trials before falling back to the point estimate.
    std::size_t max_trial_scale = 8;
    std::uint64_t seed = 1;
    int threads = 0;  // 0: OpenMP default
};

struct ThresholdProbe {
    double p = 0;
    SpanningEstimate crossing;
};

struct ThresholdEstimate {
    double low = 0;
    double high = 1;
    double estimate = 0.5;
    std::vector<ThresholdProbe> probes;
};

ThresholdEstimate estimate_threshold(const LatticeFamily& family, const ThresholdOptions& options);

// Crossing frequency of `family` at p over `trials` samples keyed by
// (seed, stream); OpenMP-parallel, identical result for any thread count.
SpanningEstimate sample_crossing(const LatticeFamily& family, double p, std::size_t trials, std::uint64_t seed,
                                 std::uint64_t stream, int threads = 0);

// Removes each lost vertex and Z-measures its alive neighbours. Returns the
// number of neighbour measurements performed.
std::size_t punch_out(GraphRegister& reg, const std::vector<Vertex>& lost);

struct PathfindingOutcome {
    int sustained_layers = 0;  // before the first wire died (min over wires)
    std::vector<int> per_wire;
    std::vector<std::vector<Vertex>> paths;
};

// Routes `wires` vertex-disjoint paths through the lattice along z, deciding
// each step from layers <= frontier + window only.
PathfindingOutcome find_paths_windowed(const BuiltLattice& lattice, int window, int wires = 1);

}  // namespace ballistic
