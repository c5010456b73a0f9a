#pragma once

#include <optional>
#include <string>

#include "ballistic/graph_state.h"
#include "ballistic/rng.h"

namespace ballistic {

enum class FusionKind { TypeI, TypeII, BoostedTypeII };

std::string to_string(FusionKind kind);
FusionKind fusion_kind_from_string(const std::string& name);

struct FusionParams {
    FusionKind kind = FusionKind::TypeII;
    double success_prob = 0.5;
    double transmission = 1.0;  // per photon entering the gate
    int ancilla_cost = 0;

    // Defaults per kind: 1/2, 1/2, 3/4; boosting consumes a Bell pair.
    static FusionParams defaults(FusionKind kind);
    void validate() const;
};

enum class FusionResult { Success, Failure, LossHerald };

std::string to_string(FusionResult r);

struct FusionOutcome {
    FusionResult result = FusionResult::Failure;
    Vertex a = 0;
    Vertex b = 0;
    int ancillas = 0;
};

FusionOutcome fuse(GraphRegister& reg, Vertex a, Vertex b, const FusionParams& params, CounterRng& rng);
// Applies the graph rule of a given branch; failure branches measure Z with `rng`.
FusionOutcome fuse_with_result(GraphRegister& reg, Vertex a, Vertex b, const FusionParams& params,
                               FusionResult result, CounterRng& rng);

// Per-bond retention eta^2 * lambda.
double expected_bond_probability(const FusionParams& params);

}  // namespace ballistic
