#include "ballistic/graph_oracle.h"

#include "ballistic/errors.h"

namespace ballistic {

DenseStabilizerState graph_state_dense(const GraphRegister& g) {
    DenseStabilizerState s(g.vertex_count());
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        s.h(v);
    }
    for (auto [u, v] : g.edges()) {
        s.cz(u, v);
    }
    return s;
}

DenseStabilizerState to_dense(const GraphRegister& g) {
    auto s = graph_state_dense(g);
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (!g.frame_known(v)) {
            throw VertexStateError("to_dense: vertex " + std::to_string(v) + " has an unknown frame");
        }
        s.apply_pauli(v, g.frame(v));
        s.apply(v, g.vop(v));
    }
    return s;
}

}  // namespace ballistic

#include <sstream>

namespace ballistic {

namespace {

std::string run_fuzz_case(std::uint64_t seed, std::size_t index, std::size_t max_qubits, std::size_t max_ops) {
    CounterRng rng(seed, index);
    std::size_t n = 2 + rng.below(max_qubits - 1);
    std::size_t ops = 1 + rng.below(max_ops);
    GraphRegister g(n);
    DenseStabilizerState d(n);
    for (std::size_t q = 0; q < n; ++q) {
        d.h(q);
    }
    std::ostringstream log;
    log << "case " << index << " n=" << n << ":";
    auto pick_alive = [&]() -> long long {
        std::vector<Vertex> alive;
        for (Vertex v = 0; v < n; ++v) {
            if (g.alive(v)) {
                alive.push_back(v);
            }
        }
        if (alive.empty()) {
            return -1;
        }
        return alive[rng.below(alive.size())];
    };
    for (std::size_t step = 0; step < ops; ++step) {
        long long a = pick_alive();
        if (a < 0) {
            break;
        }
        auto va = static_cast<Vertex>(a);
        switch (rng.below(6)) {
            case 0: {
                auto c = LocalClifford::from_index(static_cast<int>(rng.below(24)));
                log << " C" << c.index() << "(" << a << ")";
                g.apply_local(va, c);
                d.apply(va, c);
                break;
            }
            case 1: {
                auto p = static_cast<Pauli>(1 + rng.below(3));
                log << " " << pauli_char(p) << "(" << a << ")";
                g.apply_pauli(va, p);
                d.apply_pauli(va, p);
                break;
            }
            case 2:
            case 3: {
                long long b = pick_alive();
                if (b == a) {
                    break;
                }
                log << " CZ(" << a << "," << b << ")";
                g.apply_cz(va, static_cast<Vertex>(b));
                d.cz(va, static_cast<std::size_t>(b));
                break;
            }
            case 4: {
                log << " LC(" << a << ")";
                g.local_complement(va);
                break;
            }
            case 5: {
                auto basis = static_cast<Pauli>(1 + rng.below(3));
                int want = rng.bernoulli(0.5) ? -1 : 1;
                bool gdet = false, ddet = false;
                int go = g.measure_pauli_forced(va, basis, want, &gdet);
                int dout = d.measure_forced(PauliString::single(n, va, basis), go, &ddet);
                log << " M" << pauli_char(basis) << "(" << a << ")=" << go;
                if (gdet != ddet || dout != go) {
                    log << " outcome mismatch: graph " << go << (gdet ? " det" : " rnd") << ", dense " << dout
                        << (ddet ? " det" : " rnd");
                    return log.str();
                }
                break;
            }
        }
        if (!to_dense(g).same_state(d)) {
            log << " state mismatch";
            return log.str();
        }
    }
    return {};
}

}  // namespace

OracleFuzzResult fuzz_graph_vs_dense(std::size_t cases, std::uint64_t seed, std::size_t max_qubits,
                                     std::size_t max_ops) {
    OracleFuzzResult result;
    result.cases = cases;
    for (std::size_t i = 0; i < cases; ++i) {
        std::string failure = run_fuzz_case(seed, i, max_qubits, max_ops);
        if (!failure.empty()) {
            if (result.failures == 0) {
                result.first_failure = failure;
            }
            ++result.failures;
        }
    }
    return result;
}

}  // namespace ballistic
