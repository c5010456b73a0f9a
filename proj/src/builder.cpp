#include "ballistic/builder.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ballistic/errors.h"
#include "json.hpp"

namespace ballistic {

using nlohmann::json;

std::string to_string(BondDirection d) {
    switch (d) {
        case BondDirection::Local: return "local";
        case BondDirection::X: return "x";
        case BondDirection::Y: return "y";
        case BondDirection::Z: return "z";
    }
    return "?";
}

namespace {

BondDirection direction_from_string(const std::string& s) {
    if (s == "local") return BondDirection::Local;
    if (s == "x") return BondDirection::X;
    if (s == "y") return BondDirection::Y;
    if (s == "z") return BondDirection::Z;
    throw SpecError("cellspec: unknown bond direction '" + s + "' (valid: local, x, y, z)");
}

}  // namespace

UnitCellSpec UnitCellSpec::default_cell() {
    UnitCellSpec c;
    // Triple k holds slots 3k, 3k+1, 3k+2 as a linear cluster.
    c.wiring = {
        {0, 7, BondDirection::Local},  {2, 10, BondDirection::Local}, {3, 13, BondDirection::Local},
        {5, 16, BondDirection::Local}, {11, 15, BondDirection::Local}, {17, 9, BondDirection::Z},
        {8, 6, BondDirection::X},      {14, 12, BondDirection::Y},
    };
    c.crossing_slots = {1, 4};
    c.delayed_slots = {1, 4, 17};
    c.symmetric_sources = {2, 3, 4, 5};
    return c;
}

int UnitCellSpec::intra_fusions() const {
    return static_cast<int>(std::count_if(wiring.begin(), wiring.end(), [](const SlotPair& p) {
        return p.direction == BondDirection::Local || p.direction == BondDirection::Z;
    }));
}

int UnitCellSpec::boundary_slots() const {
    return 2 * static_cast<int>(std::count_if(wiring.begin(), wiring.end(), [](const SlotPair& p) {
               return p.direction == BondDirection::X || p.direction == BondDirection::Y;
           }));
}

int UnitCellSpec::fusions_per_cell() const { return static_cast<int>(wiring.size()); }

void UnitCellSpec::validate() const {
    if (sources_per_cell < 1 || photons_per_source != 3) {
        throw SpecError("cellspec: need >= 1 source of 3-photon triples");
    }
    const int n = slot_count();
    auto in_range = [n](int s) { return s >= 0 && s < n; };
    if (!in_range(primal_slot) || !in_range(dual_slot) || primal_slot == dual_slot) {
        throw SpecError("cellspec: computational slots must be two distinct slots in [0, " + std::to_string(n) + ")");
    }
    std::vector<int> uses(static_cast<std::size_t>(n), 0);
    for (const auto& p : wiring) {
        if (!in_range(p.first) || !in_range(p.second)) {
            throw SpecError("cellspec: wiring slot out of range");
        }
        if (p.direction == BondDirection::Local && p.first == p.second) {
            throw SpecError("cellspec: slot " + std::to_string(p.first) + " fused with itself");
        }
        ++uses[static_cast<std::size_t>(p.first)];
        ++uses[static_cast<std::size_t>(p.second)];
    }
    for (int s = 0; s < n; ++s) {
        int u = uses[static_cast<std::size_t>(s)];
        if (is_computational(s) && u != 0) {
            throw SpecError("cellspec: computational slot " + std::to_string(s) + " appears in a fusion");
        }
        if (!is_computational(s) && u != 1) {
            throw SpecError("cellspec: slot " + std::to_string(s) + " appears in " + std::to_string(u) +
                            " fusions (expected exactly 1)");
        }
    }
    if (2 * intra_fusions() + boundary_slots() != n - computational_photons()) {
        throw SpecError("cellspec: 2*intra_fusions + boundary_slots must equal the non-computational slot count");
    }
    for (int s : crossing_slots) {
        if (!in_range(s)) {
            throw SpecError("cellspec: crossing slot out of range");
        }
    }
    for (int s : delayed_slots) {
        if (!in_range(s)) {
            throw SpecError("cellspec: delayed slot out of range");
        }
    }
    for (int k : symmetric_sources) {
        if (k < 0 || k >= sources_per_cell || k == primal_slot / 3 || k == dual_slot / 3) {
            throw SpecError("cellspec: symmetric source must be a non-computational triple");
        }
    }
    if (!(ghz_success_probability > 0 && ghz_success_probability <= 1)) {
        throw SpecError("cellspec: ghz_success_probability must lie in (0,1]");
    }
}

void WaferSpec::validate() const {
    if (nx < 1 || ny < 1 || nz < 1) {
        throw SpecError("wafer: dimensions must be >= 1");
    }
    fusion.validate();
    if (!(photon_loss >= 0 && photon_loss < 1)) {
        throw SpecError("wafer: photon_loss must lie in [0,1)");
    }
    if (!(filter_fidelity >= 0 && filter_fidelity <= 1)) {
        throw SpecError("wafer: filter_fidelity must lie in [0,1]");
    }
}

Vertex make_ghz3(GraphRegister& reg) {
    Vertex v = reg.add_vertices(3);
    reg.apply_cz(v, v + 1);
    reg.apply_cz(v + 1, v + 2);
    return v;
}

bool apply_plus_filter(GraphRegister& reg, Vertex v, double fidelity, CounterRng& rng) {
    if (!reg.alive(v)) {
        throw VertexStateError("apply_plus_filter: vertex " + std::to_string(v) + " is dead or out of range");
    }
    if (rng.bernoulli(fidelity)) {
        return true;
    }
    reg.measure_pauli(v, Pauli::Z, rng);
    return false;
}

BuiltLattice build_wafer(const WaferSpec& spec, const UnitCellSpec& cell, CounterRng& rng) {
    cell.validate();
    spec.validate();
    FusionParams fp = spec.fusion;
    fp.transmission = spec.fusion.transmission * (1.0 - spec.photon_loss);

    BuiltLattice out;
    out.nx = spec.nx;
    out.ny = spec.ny;
    out.nz = spec.nz;
    const auto slots = static_cast<Vertex>(cell.slot_count());
    const std::size_t per_layer = static_cast<std::size_t>(spec.nx) * static_cast<std::size_t>(spec.ny);
    out.graph.reserve(spec.cell_count() * slots);
    out.coord.reserve(spec.cell_count() * slots);
    out.sites.reserve(spec.cell_count());

    auto base = [&](int x, int y, int z) {
        return static_cast<Vertex>(((static_cast<std::size_t>(z) * static_cast<std::size_t>(spec.ny) +
                                     static_cast<std::size_t>(y)) *
                                        static_cast<std::size_t>(spec.nx) +
                                    static_cast<std::size_t>(x)) *
                                   slots);
    };
    auto discard = [&](Vertex v) {
        if (out.graph.alive(v)) {
            out.graph.measure_pauli(v, Pauli::Z, rng);
        }
    };
    auto attempt = [&](Vertex a, Vertex b, BondDirection d) {
        if (!out.graph.alive(a) || !out.graph.alive(b)) {
            discard(a);
            discard(b);
            return;
        }
        auto r = fuse(out.graph, a, b, fp, rng);
        out.fusion_log.push_back({a, b, d, r.result});
        out.resources.ancillas_consumed += static_cast<std::uint64_t>(r.ancillas);
    };

    for (int z = 0; z < spec.nz; ++z) {
        const Vertex layer_first = static_cast<Vertex>(out.graph.vertex_count());
        for (int y = 0; y < spec.ny; ++y) {
            for (int x = 0; x < spec.nx; ++x) {
                for (int k = 0; k < cell.sources_per_cell; ++k) {
                    make_ghz3(out.graph);
                }
                for (int k : cell.symmetric_sources) {
                    Vertex m = base(x, y, z) + static_cast<Vertex>(3 * k + 1);
                    out.graph.local_complement(m);
                    for (Vertex v : {m - 1, m, m + 1}) {
                        out.graph.apply_local(v, out.graph.vop(v).inverse());
                    }
                }
                out.coord.insert(out.coord.end(), slots, Coord{x, y, z});
                Vertex b0 = base(x, y, z);
                out.sites.push_back({{x, y, z},
                                     b0 + static_cast<Vertex>(cell.primal_slot),
                                     b0 + static_cast<Vertex>(cell.dual_slot)});
            }
        }
        if (spec.filter_enabled) {
            for (Vertex v = layer_first; v < layer_first + per_layer * slots; ++v) {
                if (out.graph.alive(v)) {
                    apply_plus_filter(out.graph, v, spec.filter_fidelity, rng);
                }
            }
        }
        for (const auto& p : cell.wiring) {
            for (int y = 0; y < spec.ny; ++y) {
                for (int x = 0; x < spec.nx; ++x) {
                    Vertex first = base(x, y, z) + static_cast<Vertex>(p.first);
                    Vertex second = base(x, y, z) + static_cast<Vertex>(p.second);
                    switch (p.direction) {
                        case BondDirection::Local:
                            attempt(first, second, p.direction);
                            break;
                        case BondDirection::X:
                            if (x + 1 < spec.nx) {
                                attempt(first, base(x + 1, y, z) + static_cast<Vertex>(p.second), p.direction);
                            } else {
                                discard(first);
                            }
                            if (x == 0) {
                                discard(second);
                            }
                            break;
                        case BondDirection::Y:
                            if (y + 1 < spec.ny) {
                                attempt(first, base(x, y + 1, z) + static_cast<Vertex>(p.second), p.direction);
                            } else {
                                discard(first);
                            }
                            if (y == 0) {
                                discard(second);
                            }
                            break;
                        case BondDirection::Z:
                            // The first slot waits one layer for its partner.
                            if (z > 0) {
                                attempt(base(x, y, z - 1) + static_cast<Vertex>(p.first), second, p.direction);
                            } else {
                                discard(second);
                            }
                            if (z + 1 == spec.nz) {
                                discard(first);
                            }
                            break;
                    }
                }
            }
        }
    }
    for (const auto& s : out.sites) {
        for (Vertex v : {s.primal, s.dual}) {
            if (out.graph.alive(v) && rng.bernoulli(spec.photon_loss)) {
                out.lost.push_back(v);
            }
        }
    }

    auto& r = out.resources;
    r.fusions_attempted = out.fusion_log.size();
    r.computational_qubits = 2 * spec.cell_count();
    const std::uint64_t raw = spec.cell_count() * slots;
    r.photons_emitted = raw + r.ancillas_consumed;
    for (const auto& s : out.sites) {
        for (Vertex v : {s.primal, s.dual}) {
            r.surviving_computational += out.graph.alive(v);
        }
    }
    r.surviving_computational -= out.lost.size();
    r.photons_per_qubit_no_ancilla = static_cast<double>(raw) / static_cast<double>(r.computational_qubits);
    r.photons_per_qubit_with_ancilla =
        static_cast<double>(r.photons_emitted) / static_cast<double>(r.computational_qubits);
    r.photons_per_surviving_qubit =
        r.surviving_computational == 0 ? 0.0
                                       : static_cast<double>(r.photons_emitted) / static_cast<double>(r.surviving_computational);
    r.single_photons_per_ghz = 6.0 / cell.ghz_success_probability;
    return out;
}

ResourceReport cell_resource_report(const UnitCellSpec& cell, const FusionParams& fusion) {
    cell.validate();
    ResourceReport r;
    r.fusions_attempted = static_cast<std::uint64_t>(cell.fusions_per_cell());
    r.ancillas_consumed = r.fusions_attempted * static_cast<std::uint64_t>(fusion.ancilla_cost);
    r.photons_emitted = static_cast<std::uint64_t>(cell.slot_count()) + r.ancillas_consumed;
    r.computational_qubits = static_cast<std::uint64_t>(cell.computational_photons());
    r.surviving_computational = r.computational_qubits;
    r.photons_per_qubit_no_ancilla = static_cast<double>(cell.slot_count()) / cell.computational_photons();
    r.photons_per_qubit_with_ancilla = static_cast<double>(r.photons_emitted) / cell.computational_photons();
    r.photons_per_surviving_qubit = r.photons_per_qubit_with_ancilla;
    r.single_photons_per_ghz = 6.0 / cell.ghz_success_probability;
    return r;
}

OpticalDepthReport optical_depth_report(const UnitCellSpec& cell) {
    cell.validate();
    const int n = cell.slot_count();
    OpticalDepthReport rep;
    rep.per_slot.assign(static_cast<std::size_t>(n), 0);
    rep.crossings_per_slot.assign(static_cast<std::size_t>(n), 0);
    rep.active_per_slot.assign(static_cast<std::size_t>(n), 0);
    const auto& o = cell.optics;
    for (int s = 0; s < n; ++s) {
        auto i = static_cast<std::size_t>(s);
        int depth = o.source_elements;
        if (std::count(cell.crossing_slots.begin(), cell.crossing_slots.end(), s) > 0) {
            rep.crossings_per_slot[i] = 1;
            depth += o.crossing_elements;
        }
        if (std::count(cell.delayed_slots.begin(), cell.delayed_slots.end(), s) > 0) {
            depth += o.delay_elements;
        }
        if (cell.is_computational(s)) {
            rep.active_per_slot[i] = 1;
            depth += o.phase_shifter_elements + o.measurement_elements;
        } else {
            depth += o.fusion_elements;
        }
        rep.per_slot[i] = depth;
    }
    rep.max_depth = *std::max_element(rep.per_slot.begin(), rep.per_slot.end());
    double sum = 0;
    for (int d : rep.per_slot) {
        sum += d;
    }
    rep.mean_depth = sum / n;
    return rep;
}

double db_to_transmission(double loss_db) {
    if (loss_db < 0) {
        throw SpecError("loss in dB must be non-negative");
    }
    return std::pow(10.0, -loss_db / 10.0);
}

double delay_line_loss(double db_per_metre, double metres) {
    if (metres < 0) {
        throw SpecError("delay length must be non-negative");
    }
    return 1.0 - db_to_transmission(db_per_metre * metres);
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

UnitCellSpec parse_cell_spec(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SpecError(std::string("cellspec: ") + e.what());
    }
    static const std::vector<std::string> allowed = {
        "format",        "sources_per_cell", "photons_per_source",      "computational_slots", "wiring",
        "crossing_slots", "delayed_slots",   "ghz_success_probability", "optics", "symmetric_sources"};
    std::vector<std::string> unknown;
    for (const auto& [k, v] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            unknown.push_back(k);
        }
    }
    if (!unknown.empty()) {
        std::string msg = "cellspec: unknown keys:";
        for (const auto& k : unknown) {
            msg += " " + k;
        }
        throw SpecError(msg);
    }
    if (get_or<std::string>(j, "format", "") != "cellspec v1") {
        throw SpecError("cellspec: expected \"format\": \"cellspec v1\"");
    }
    try {
        UnitCellSpec c;
        c.sources_per_cell = get_or(j, "sources_per_cell", c.sources_per_cell);
        c.photons_per_source = get_or(j, "photons_per_source", c.photons_per_source);
        if (j.contains("computational_slots")) {
            c.primal_slot = j["computational_slots"].at("primal").get<int>();
            c.dual_slot = j["computational_slots"].at("dual").get<int>();
        }
        for (const auto& w : j.at("wiring")) {
            c.wiring.push_back({w.at("a").get<int>(), w.at("b").get<int>(),
                                direction_from_string(get_or<std::string>(w, "dir", "local"))});
        }
        c.crossing_slots = get_or(j, "crossing_slots", c.crossing_slots);
        c.delayed_slots = get_or(j, "delayed_slots", c.delayed_slots);
        c.symmetric_sources = get_or(j, "symmetric_sources", c.symmetric_sources);
        c.ghz_success_probability = get_or(j, "ghz_success_probability", c.ghz_success_probability);
        if (j.contains("optics")) {
            const auto& o = j["optics"];
            c.optics.source_elements = get_or(o, "source", c.optics.source_elements);
            c.optics.fusion_elements = get_or(o, "fusion", c.optics.fusion_elements);
            c.optics.crossing_elements = get_or(o, "crossing", c.optics.crossing_elements);
            c.optics.delay_elements = get_or(o, "delay", c.optics.delay_elements);
            c.optics.phase_shifter_elements = get_or(o, "phase_shifter", c.optics.phase_shifter_elements);
            c.optics.measurement_elements = get_or(o, "measurement", c.optics.measurement_elements);
        }
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw SpecError(std::string("cellspec: ") + e.what());
    }
}

std::string cell_spec_to_json(const UnitCellSpec& c) {
    json j;
    j["format"] = "cellspec v1";
    j["sources_per_cell"] = c.sources_per_cell;
    j["photons_per_source"] = c.photons_per_source;
    j["computational_slots"] = {{"primal", c.primal_slot}, {"dual", c.dual_slot}};
    j["wiring"] = json::array();
    for (const auto& p : c.wiring) {
        j["wiring"].push_back({{"a", p.first}, {"b", p.second}, {"dir", to_string(p.direction)}});
    }
    j["crossing_slots"] = c.crossing_slots;
    j["delayed_slots"] = c.delayed_slots;
    j["symmetric_sources"] = c.symmetric_sources;
    j["ghz_success_probability"] = c.ghz_success_probability;
    j["optics"] = {{"source", c.optics.source_elements},
                   {"fusion", c.optics.fusion_elements},
                   {"crossing", c.optics.crossing_elements},
                   {"delay", c.optics.delay_elements},
                   {"phase_shifter", c.optics.phase_shifter_elements},
                   {"measurement", c.optics.measurement_elements}};
    return j.dump(2) + "\n";
}

UnitCellSpec load_cell_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SpecError("cannot open cellspec '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_cell_spec(ss.str());
}

std::string computational_sites_csv(const BuiltLattice& lattice) {
    std::ostringstream out;
    out << "x,y,z,primal_id,dual_id\n";
    for (const auto& s : lattice.sites) {
        out << s.at.x << ',' << s.at.y << ',' << s.at.z << ',' << s.primal << ',' << s.dual << '\n';
    }
    return out.str();
}

}  // namespace ballistic
