#include "ballistic/fusion.h"

#include <vector>

#include "ballistic/errors.h"

namespace ballistic {

std::string to_string(FusionKind kind) {
    switch (kind) {
        case FusionKind::TypeI: return "type1";
        case FusionKind::TypeII: return "type2";
        case FusionKind::BoostedTypeII: return "boosted-type2";
    }
    return "?";
}

FusionKind fusion_kind_from_string(const std::string& name) {
    if (name == "type1") return FusionKind::TypeI;
    if (name == "type2") return FusionKind::TypeII;
    if (name == "boosted-type2") return FusionKind::BoostedTypeII;
    throw SpecError("unknown fusion kind '" + name + "' (valid: type1, type2, boosted-type2)");
}

std::string to_string(FusionResult r) {
    switch (r) {
        case FusionResult::Success: return "success";
        case FusionResult::Failure: return "failure";
        case FusionResult::LossHerald: return "loss";
    }
    return "?";
}

FusionParams FusionParams::defaults(FusionKind kind) {
    FusionParams p;
    p.kind = kind;
    p.success_prob = kind == FusionKind::BoostedTypeII ? 0.75 : 0.5;
    p.ancilla_cost = kind == FusionKind::BoostedTypeII ? 2 : 0;
    return p;
}

void FusionParams::validate() const {
    if (!(success_prob >= 0 && success_prob <= 1)) {
        throw SpecError("fusion success_prob must lie in [0,1]");
    }
    if (!(transmission >= 0 && transmission <= 1)) {
        throw SpecError("fusion transmission must lie in [0,1]");
    }
    if (ancilla_cost < 0) {
        throw SpecError("fusion ancilla_cost must be non-negative");
    }
}

double expected_bond_probability(const FusionParams& params) {
    return params.transmission * params.transmission * params.success_prob;
}

FusionOutcome fuse_with_result(GraphRegister& reg, Vertex a, Vertex b, const FusionParams& params,
                               FusionResult result, CounterRng& rng) {
    if (a == b) {
        throw VertexStateError("fuse: operands coincide at vertex " + std::to_string(a));
    }
    if (!reg.alive(a) || !reg.alive(b)) {
        throw VertexStateError("fuse: vertex " + std::to_string(reg.alive(a) ? b : a) + " is dead or out of range");
    }
    FusionOutcome out{result, a, b, params.ancilla_cost};
    switch (result) {
        case FusionResult::Success: {
            std::vector<Vertex> na, nb;
            for (Vertex u : reg.neighbors(a)) {
                if (u != b) {
                    na.push_back(u);
                }
            }
            for (Vertex w : reg.neighbors(b)) {
                if (w != a) {
                    nb.push_back(w);
                }
            }
            if (params.kind == FusionKind::TypeI) {
                // a inherits b's neighbourhood; only b is consumed.
                reg.consume(b);
                for (Vertex w : nb) {
                    reg.toggle_edge(a, w);
                }
                break;
            }
            for (Vertex u : na) {
                for (Vertex w : nb) {
                    if (u != w) {
                        reg.toggle_edge(u, w);
                    }
                }
            }
            reg.consume(a);
            reg.consume(b);
            break;
        }
        case FusionResult::Failure:
            reg.measure_pauli(a, Pauli::Z, rng);
            reg.measure_pauli(b, Pauli::Z, rng);
            break;
        case FusionResult::LossHerald:
            reg.remove_lost(a);
            reg.remove_lost(b);
            break;
    }
    return out;
}

FusionOutcome fuse(GraphRegister& reg, Vertex a, Vertex b, const FusionParams& params, CounterRng& rng) {
    FusionResult r;
    double eta2 = params.transmission * params.transmission;
    double u = rng.uniform01();
    if (u >= eta2) {
        r = FusionResult::LossHerald;
    } else if (u < eta2 * params.success_prob) {
        r = FusionResult::Success;
    } else {
        r = FusionResult::Failure;
    }
    return fuse_with_result(reg, a, b, params, r, rng);
}

}  // namespace ballistic
