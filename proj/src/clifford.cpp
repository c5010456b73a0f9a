#include "ballistic/clifford.h"

#include <array>
#include <deque>
#include <stdexcept>

#include "ballistic/errors.h"

namespace ballistic {

char pauli_char(Pauli p) {
    static constexpr char chars[] = {'I', 'X', 'Z', 'Y'};
    return chars[static_cast<int>(p)];
}

Pauli pauli_from_char(char c) {
    switch (c) {
        case 'I': return Pauli::I;
        case 'X': return Pauli::X;
        case 'Y': return Pauli::Y;
        case 'Z': return Pauli::Z;
        default: throw SpecError(std::string("unknown Pauli '") + c + "'");
    }
}

PauliProduct multiply_paulis(Pauli a, Pauli b) {
    int x1 = has_x(a), z1 = has_z(a), x2 = has_x(b), z2 = has_z(b);
    Pauli r = a * b;
    int x3 = has_x(r), z3 = has_z(r);
    int k = x1 * z1 + x2 * z2 + 2 * z1 * x2 - x3 * z3;
    return {r, ((k % 4) + 4) % 4};
}

namespace {

struct Action {
    SignedPauli x, z;
    bool operator==(const Action&) const = default;
};

int action_key(const Action& a) {
    return static_cast<int>(a.x.pauli) | (a.x.negative << 2) | (static_cast<int>(a.z.pauli) << 3) |
           (a.z.negative << 5);
}

SignedPauli apply_action(const Action& a, SignedPauli p) {
    SignedPauli out;
    switch (p.pauli) {
        case Pauli::I: out = {Pauli::I, false}; break;
        case Pauli::X: out = a.x; break;
        case Pauli::Z: out = a.z; break;
        case Pauli::Y: {
            // Y = i X Z
            auto prod = multiply_paulis(a.x.pauli, a.z.pauli);
            int phase = 1 + prod.phase + 2 * (a.x.negative ^ a.z.negative);
            phase %= 4;
            if (phase % 2 != 0) {
                throw std::logic_error("non-Hermitian Clifford image");
            }
            out = {prod.result, phase == 2};
            break;
        }
    }
    out.negative ^= p.negative;
    return out;
}

Action compose(const Action& outer, const Action& inner) {
    return {apply_action(outer, inner.x), apply_action(outer, inner.z)};
}

struct Tables {
    std::array<Action, 24> action{};
    std::array<std::string, 24> word;
    std::array<int, 64> index_of_key{};
    std::array<std::array<std::uint8_t, 24>, 24> mul{};
    std::array<std::uint8_t, 24> inv{};

    Tables() {
        index_of_key.fill(-1);
        const Action id{{Pauli::X, false}, {Pauli::Z, false}};
        const Action h{{Pauli::Z, false}, {Pauli::X, false}};
        const Action s{{Pauli::Y, false}, {Pauli::Z, false}};
        int count = 0;
        std::deque<int> queue;
        auto add = [&](const Action& a, std::string w) {
            int key = action_key(a);
            if (index_of_key[key] >= 0) {
                return;
            }
            index_of_key[key] = count;
            action[count] = a;
            word[count] = std::move(w);
            queue.push_back(count);
            ++count;
        };
        add(id, "");
        while (!queue.empty()) {
            int c = queue.front();
            queue.pop_front();
            add(compose(h, action[c]), word[c] + "H");
            add(compose(s, action[c]), word[c] + "S");
        }
        if (count != 24) {
            throw std::logic_error("Clifford group generation failed");
        }
        for (int a = 0; a < 24; ++a) {
            for (int b = 0; b < 24; ++b) {
                mul[a][b] = static_cast<std::uint8_t>(index_of_key[action_key(compose(action[a], action[b]))]);
            }
        }
        for (int a = 0; a < 24; ++a) {
            for (int b = 0; b < 24; ++b) {
                if (mul[a][b] == 0) {
                    inv[a] = static_cast<std::uint8_t>(b);
                }
            }
        }
    }
};

const Tables& tables() {
    static const Tables t;
    return t;
}

}  // namespace

LocalClifford LocalClifford::from_index(int index) {
    if (index < 0 || index >= kCount) {
        throw SpecError("local Clifford index out of range: " + std::to_string(index));
    }
    return LocalClifford(static_cast<std::uint8_t>(index));
}

LocalClifford LocalClifford::from_action(SignedPauli image_of_x, SignedPauli image_of_z) {
    int idx = tables().index_of_key[action_key({image_of_x, image_of_z})];
    if (idx < 0) {
        throw SpecError("not a Clifford action");
    }
    return LocalClifford(static_cast<std::uint8_t>(idx));
}

LocalClifford LocalClifford::hadamard() { return from_action({Pauli::Z, false}, {Pauli::X, false}); }
LocalClifford LocalClifford::phase() { return from_action({Pauli::Y, false}, {Pauli::Z, false}); }
LocalClifford LocalClifford::phase_dagger() { return from_action({Pauli::Y, true}, {Pauli::Z, false}); }
LocalClifford LocalClifford::sqrt_x() { return from_action({Pauli::X, false}, {Pauli::Y, true}); }
LocalClifford LocalClifford::sqrt_x_dagger() { return from_action({Pauli::X, false}, {Pauli::Y, false}); }

LocalClifford LocalClifford::pauli(Pauli p) {
    return from_action({Pauli::X, has_z(p)}, {Pauli::Z, has_x(p)});
}

SignedPauli LocalClifford::conjugate(Pauli p) const { return apply_action(tables().action[index_], {p, false}); }

LocalClifford LocalClifford::operator*(LocalClifford rhs) const {
    return LocalClifford(tables().mul[index_][rhs.index_]);
}

LocalClifford LocalClifford::inverse() const { return LocalClifford(tables().inv[index_]); }

bool LocalClifford::is_diagonal() const {
    const auto& z = tables().action[index_].z;
    return z.pauli == Pauli::Z && !z.negative;
}

const std::string& LocalClifford::word() const { return tables().word[index_]; }

std::string LocalClifford::name() const {
    if (index_ == 0) {
        return "I";
    }
    return word();
}

}  // namespace ballistic
