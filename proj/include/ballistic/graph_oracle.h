#pragma once

#include "ballistic/dense_stabilizer.h"
#include "ballistic/graph_state.h"

namespace ballistic {

// Dense tableau of the state a GraphRegister represents, dead vertices
// included. Throws CapacityError above the oracle bound and VertexStateError
// when a frame is unknown.
DenseStabilizerState to_dense(const GraphRegister& g);

// Dense state of the pure graph state with the given adjacency.
DenseStabilizerState graph_state_dense(const GraphRegister& g);

}  // namespace ballistic

#include <cstdint>
#include <string>

namespace ballistic {

struct OracleFuzzResult {
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string first_failure;
};

// Random sequences of local Cliffords, Paulis, CZs, complementations and
// Pauli measurements replayed on both engines; each case must end in the same
// stabilizer group with consistent outcomes.
OracleFuzzResult fuzz_graph_vs_dense(std::size_t cases, std::uint64_t seed, std::size_t max_qubits = 10,
                                     std::size_t max_ops = 30);

}  // namespace ballistic
