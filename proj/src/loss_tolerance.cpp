#include "ballistic/loss_tolerance.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <omp.h>

#include "ballistic/dense_stabilizer.h"
#include "ballistic/errors.h"

namespace ballistic {

void CrazyGraphSpec::validate() const {
    if (N < 1 || L < 1) {
        throw SpecError("crazy graph needs N >= 1 and L >= 1");
    }
    if (!(loss >= 0 && loss <= 1) || !(z_flip >= 0 && z_flip <= 1)) {
        throw SpecError("crazy graph loss and z_flip must lie in [0,1]");
    }
}

GraphRegister build_crazy_graph(const CrazyGraphSpec& spec) {
    spec.validate();
    const auto L = static_cast<Vertex>(spec.L);
    GraphRegister g(static_cast<std::size_t>(spec.N) * L);
    for (Vertex c = 0; c + 1 < static_cast<Vertex>(spec.N); ++c) {
        for (Vertex i = 0; i < L; ++i) {
            for (Vertex j = 0; j < L; ++j) {
                g.apply_cz(c * L + i, (c + 1) * L + j);
            }
        }
    }
    return g;
}

double teleport_success_prob(const CrazyGraphSpec& spec) {
    spec.validate();
    return std::pow(1.0 - std::pow(spec.loss, spec.L), spec.N);
}

double column_flip_prob(int L, double loss, double z_flip) {
    CrazyGraphSpec{1, L, loss, z_flip}.validate();
    double total = 0;
    for (int k = 1; k <= L; ++k) {
        double survive = std::exp(std::lgamma(L + 1.0) - std::lgamma(k + 1.0) - std::lgamma(L - k + 1.0)) *
                         std::pow(1 - loss, k) * std::pow(loss, L - k);
        double wrong = 0;
        for (int w = 0; w <= k; ++w) {
            double pw = std::exp(std::lgamma(k + 1.0) - std::lgamma(w + 1.0) - std::lgamma(k - w + 1.0)) *
                        std::pow(z_flip, w) * std::pow(1 - z_flip, k - w);
            if (2 * w > k) {
                wrong += pw;
            } else if (2 * w == k) {
                wrong += 0.5 * pw;
            }
        }
        total += survive * wrong;
    }
    return total;
}

TeleportEstimate simulate_teleport(const CrazyGraphSpec& spec, std::size_t trials, std::uint64_t seed, int threads) {
    spec.validate();
    if (trials == 0) {
        throw SpecError("simulate_teleport needs at least one trial");
    }
    const auto n = static_cast<long long>(trials);
    long long successes = 0, flips = 0, ties = 0;
#pragma omp parallel for schedule(static) reduction(+ : successes, flips, ties) \
    num_threads(threads > 0 ? threads : omp_get_max_threads())
    for (long long t = 0; t < n; ++t) {
        const CounterRng trial(seed, static_cast<std::uint64_t>(t));
        bool ok = true, flipped = false;
        for (int c = 0; c < spec.N && ok; ++c) {
            CounterRng col = trial.split(static_cast<std::uint64_t>(c));
            int alive = 0, wrong = 0;
            for (int i = 0; i < spec.L; ++i) {
                bool lost = col.uniform01() < spec.loss;
                bool flip = col.uniform01() < spec.z_flip;
                if (!lost) {
                    ++alive;
                    wrong += flip;
                }
            }
            if (alive == 0) {
                ok = false;
                break;
            }
            if (2 * wrong > alive) {
                flipped = true;
            } else if (2 * wrong == alive && wrong > 0) {
                ++ties;
                flipped |= col.bernoulli(0.5);
            }
        }
        successes += ok;
        flips += ok && flipped;
    }
    TeleportEstimate e;
    e.trials = trials;
    e.successes = static_cast<std::size_t>(successes);
    e.flips = static_cast<std::size_t>(flips);
    e.tie_votes = static_cast<std::size_t>(ties);
    const double nt = static_cast<double>(trials);
    e.success_rate = static_cast<double>(successes) / nt;
    e.flip_rate = static_cast<double>(flips) / nt;
    e.tie_rate = static_cast<double>(ties) / (nt * spec.N);
    // Binomial errors at the model values so that all-success runs still carry a width.
    double ps = teleport_success_prob(spec);
    e.success_error = std::sqrt(ps * (1 - ps) / nt);
    double pf = e.flip_rate;
    if (spec.N == 1) {
        pf = column_flip_prob(spec.L, spec.loss, spec.z_flip);
    }
    e.flip_error = std::sqrt(pf * (1 - pf) / nt);
    return e;
}

namespace {

std::string vertex_list(const std::vector<Vertex>& vs) {
    std::string s;
    for (Vertex v : vs) {
        s += ' ' + std::to_string(v);
    }
    return s;
}

}  // namespace

std::string gadget_to_text(const GadgetGraph& g) {
    std::ostringstream out;
    out << "# in:" << vertex_list(g.inputs) << '\n';
    out << "# out:" << vertex_list(g.outputs) << '\n';
    for (auto [v, p] : g.premeasure) {
        out << "# premeasure: " << v << ' ' << pauli_char(p) << '\n';
    }
    for (auto [v, p] : g.measure) {
        out << "# measure: " << v << ' ' << pauli_char(p) << '\n';
    }
    out << to_edge_list(g.graph);
    return out.str();
}

GadgetGraph gadget_from_text(std::string_view text) {
    auto doc = parse_edge_list(text);
    GadgetGraph g;
    g.graph = std::move(doc.graph);
    const auto n = g.graph.vertex_count();
    auto read_vertex = [&](std::istringstream& in, const std::string& line) {
        long long v = -1;
        if (!(in >> v) || v < 0 || static_cast<std::size_t>(v) >= n) {
            throw SpecError("gadget annotation '" + line + "': bad vertex");
        }
        return static_cast<Vertex>(v);
    };
    for (const auto& line : doc.annotations) {
        std::istringstream in(line.substr(1));
        std::string tag;
        in >> tag;
        if (tag == "in:" || tag == "out:") {
            auto& list = tag == "in:" ? g.inputs : g.outputs;
            while (!(in >> std::ws).eof()) {
                list.push_back(read_vertex(in, line));
            }
        } else if (tag == "premeasure:" || tag == "measure:") {
            Vertex v = read_vertex(in, line);
            std::string basis;
            if (!(in >> basis) || basis.size() != 1 || std::string("XYZ").find(basis[0]) == std::string::npos) {
                throw SpecError("gadget annotation '" + line + "': basis must be X, Y or Z");
            }
            (tag == "premeasure:" ? g.premeasure : g.measure).emplace_back(v, pauli_from_char(basis[0]));
        }
    }
    return g;
}

GadgetGraph load_gadget(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SpecError("cannot read gadget file " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return gadget_from_text(buf.str());
    } catch (const SpecError& e) {
        throw SpecError(path + ": " + e.what());
    }
}

GadgetGraph build_s_gadget(int L) {
    if (L < 1) {
        throw SpecError("gadget width must be >= 1");
    }
    const auto l = static_cast<Vertex>(L);
    GadgetGraph g;
    g.graph = GraphRegister(2 * l + 1);
    const Vertex c = l;
    for (Vertex i = 0; i < l; ++i) {
        g.graph.apply_cz(i, c);
        g.graph.apply_cz(c, l + 1 + i);
        g.inputs.push_back(i);
        g.outputs.push_back(l + 1 + i);
    }
    g.premeasure.emplace_back(c, Pauli::Y);
    return g;
}

bool gadget_usable(const GadgetGraph& g, const std::vector<Vertex>& lost) {
    for (auto [v, p] : g.premeasure) {
        if (std::find(lost.begin(), lost.end(), v) != lost.end()) {
            return false;
        }
    }
    return true;
}

namespace {

// Prepares one of the six Pauli eigenstates (index: +Z,-Z,+X,-X,+Y,-Y) from |0>.
void prepare_eigenstate(DenseStabilizerState& s, std::size_t q, int which) {
    if (which >= 2) {
        s.h(q);
    }
    if (which >= 4) {
        s.s(q);
    }
    if (which % 2 == 1) {
        s.apply_pauli(q, which == 1 ? Pauli::X : Pauli::Z);
    }
}

int eigenstate_index(Pauli basis, int outcome) {
    int base = basis == Pauli::Z ? 0 : basis == Pauli::X ? 2 : 4;
    return base + (outcome == -1 ? 1 : 0);
}

}  // namespace

bool verify_s_gadget(int L, const std::vector<Vertex>& lost, std::uint64_t seed) {
    return verify_gadget_gate(build_s_gadget(L), LocalClifford::phase(), lost, seed);
}

bool verify_gadget_gate(const GadgetGraph& gadget, LocalClifford target, const std::vector<Vertex>& lost,
                        std::uint64_t seed) {
    if (!gadget_usable(gadget, lost)) {
        return false;
    }
    const std::size_t gn = gadget.graph.vertex_count();
    const std::size_t n = gn + 2;
    if (n > DenseStabilizerState::kMaxQubits) {
        throw CapacityError("gadget check: " + std::to_string(n) + " qubits exceed the dense oracle bound");
    }
    auto is_lost = [&](Vertex v) { return std::find(lost.begin(), lost.end(), v) != lost.end(); };
    const std::size_t wire = 0, readout = n - 1;
    auto q = [](Vertex v) { return static_cast<std::size_t>(v) + 1; };
    std::vector<std::pair<std::size_t, Pauli>> measured;
    measured.emplace_back(wire, Pauli::X);
    for (Vertex v : gadget.inputs) {
        if (!is_lost(v)) {
            measured.emplace_back(q(v), Pauli::X);
        }
    }
    for (Vertex v : gadget.outputs) {
        if (!is_lost(v)) {
            measured.emplace_back(q(v), Pauli::X);
        }
    }
    bool any_input = false, any_output = false;
    for (Vertex v : gadget.inputs) any_input |= !is_lost(v);
    for (Vertex v : gadget.outputs) any_output |= !is_lost(v);
    if (!any_input || !any_output) {
        return false;
    }

    CounterRng rng(seed, 0x736761);
    for (int record = 0; record < 4; ++record) {
        std::vector<int> forced;
        for (std::size_t i = 0; i <= measured.size(); ++i) {
            forced.push_back(rng.bernoulli(0.5) ? -1 : +1);
        }
        // Bit f set: readout = f * target * input is consistent so far for that record.
        std::map<std::vector<int>, unsigned> frames_for_record;
        for (int input = 0; input < 6; ++input) {
            DenseStabilizerState s(n);
            for (std::size_t v = 0; v < gn; ++v) {
                if (!is_lost(static_cast<Vertex>(v))) {
                    s.h(q(static_cast<Vertex>(v)));
                }
            }
            s.h(readout);
            for (auto [a, b] : gadget.graph.edges()) {
                if (!is_lost(a) && !is_lost(b)) {
                    s.cz(q(a), q(b));
                }
            }
            std::vector<int> outcomes;
            for (auto [v, p] : gadget.premeasure) {
                outcomes.push_back(s.measure_forced(PauliString::single(n, q(v), p), forced[0]));
            }
            prepare_eigenstate(s, wire, input);
            for (Vertex v : gadget.inputs) {
                if (!is_lost(v)) {
                    s.cz(wire, q(v));
                }
            }
            for (Vertex v : gadget.outputs) {
                if (!is_lost(v)) {
                    s.cz(q(v), readout);
                }
            }
            for (std::size_t i = 0; i < measured.size(); ++i) {
                auto [qq, p] = measured[i];
                outcomes.push_back(s.measure_forced(PauliString::single(n, qq, p), forced[i + 1]));
            }

            unsigned valid = 0;
            for (Pauli frame : {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z}) {
                DenseStabilizerState ref(n);
                std::size_t k = 0;
                for (auto [v, p] : gadget.premeasure) {
                    prepare_eigenstate(ref, q(v), eigenstate_index(p, outcomes[k++]));
                }
                for (auto [qq, p] : measured) {
                    prepare_eigenstate(ref, qq, eigenstate_index(p, outcomes[k++]));
                }
                prepare_eigenstate(ref, readout, input);
                ref.apply(readout, target);
                ref.apply_pauli(readout, frame);
                if (ref.same_state(s)) {
                    valid |= 1u << static_cast<unsigned>(frame);
                }
            }
            auto [it, inserted] = frames_for_record.emplace(outcomes, valid);
            it->second &= valid;
            if (it->second == 0) {
                return false;
            }
        }
    }
    return true;
}

GadgetGraph fig6_hub_graph(int L) {
    if (L < 1) {
        throw SpecError("fig6 block width must be >= 1");
    }
    const auto l = static_cast<Vertex>(L);
    GadgetGraph g;
    g.graph = GraphRegister(2 * l + 2);
    const Vertex x = 2 * l, y = 2 * l + 1;
    for (Vertex i = 0; i < l; ++i) {
        g.graph.apply_cz(x, i);
        g.graph.apply_cz(y, l + i);
        g.inputs.push_back(i);
        g.outputs.push_back(l + i);
    }
    g.graph.apply_cz(x, y);
    g.measure = {{x, Pauli::X}, {y, Pauli::X}};
    return g;
}

GadgetGraph fig6_ring_graph() {
    GadgetGraph g;
    g.graph = GraphRegister(8);
    const Vertex x = 6, y = 7;
    for (auto [a, b] : std::vector<std::pair<Vertex, Vertex>>{
             {x, 0}, {0, 3}, {3, 1}, {1, x}, {y, 4}, {4, 2}, {2, 5}, {5, y}, {3, 2}, {x, y}}) {
        g.graph.apply_cz(a, b);
    }
    g.inputs = {0, 1, 2};
    g.outputs = {3, 4, 5};
    g.measure = {{x, Pauli::X}, {y, Pauli::X}};
    return g;
}

bool fig6_instance_matches(const GadgetGraph& left, int L) {
    GraphRegister g = left.graph;
    for (auto [v, p] : left.measure) {
        g.measure_pauli_forced(v, p, +1);
    }
    GraphRegister block = build_crazy_graph({2, L, 0, 0});
    if (g.vertex_count() < block.vertex_count()) {
        throw SpecError("fig6 instance smaller than a width-" + std::to_string(L) + " block");
    }
    block.add_vertices(g.vertex_count() - block.vertex_count());
    for (auto [v, p] : left.measure) {
        block.consume(v);
    }
    return lc_equivalent(g, block);
}

bool verify_fig6_equivalence(int L) {
    if (L < 2) {
        throw SpecError("fig6 block width must be >= 2");
    }
    bool ok = fig6_instance_matches(fig6_hub_graph(L), L);
    if (L == 3) {
        ok = ok && fig6_instance_matches(fig6_ring_graph(), 3);
    }
    return ok;
}

}  // namespace ballistic
