#pragma once

#include <cstdint>
#include <string>

namespace ballistic {

// Bit 0 = X component, bit 1 = Z component. Y = iXZ.
enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

inline Pauli operator*(Pauli a, Pauli b) {
    return static_cast<Pauli>(static_cast<std::uint8_t>(a) ^ static_cast<std::uint8_t>(b));
}
inline bool has_x(Pauli p) { return (static_cast<std::uint8_t>(p) & 1) != 0; }
inline bool has_z(Pauli p) { return (static_cast<std::uint8_t>(p) & 2) != 0; }
inline bool commutes(Pauli a, Pauli b) {
    return ((has_x(a) && has_z(b)) ^ (has_z(a) && has_x(b))) == false;
}
char pauli_char(Pauli p);
Pauli pauli_from_char(char c);

struct SignedPauli {
    Pauli pauli = Pauli::I;
    bool negative = false;
    bool operator==(const SignedPauli&) const = default;
};

// One of the 24 single-qubit Clifford operators modulo global phase, identified
// by its conjugation action on X and Z.
class LocalClifford {
   public:
    static constexpr int kCount = 24;

    constexpr LocalClifford() = default;
    static LocalClifford from_index(int index);
    static LocalClifford from_action(SignedPauli image_of_x, SignedPauli image_of_z);

    static LocalClifford identity() { return {}; }
    static LocalClifford hadamard();
    static LocalClifford phase();         // S: X -> Y
    static LocalClifford phase_dagger();  // X -> -Y
    static LocalClifford sqrt_x();        // exp(-i pi/4 X): Z -> -Y
    static LocalClifford sqrt_x_dagger(); // exp(+i pi/4 X): Z -> Y
    static LocalClifford pauli(Pauli p);

    int index() const { return index_; }

    // C P C^dagger.
    SignedPauli conjugate(Pauli p) const;
    // Operator product: (this * rhs) applies rhs first.
    LocalClifford operator*(LocalClifford rhs) const;
    LocalClifford inverse() const;
    // Diagonal in the computational basis (Z -> +Z), hence commutes with CZ.
    bool is_diagonal() const;

    // Gates 'H' and 'S' which, applied left to right, realise this operator.
    const std::string& word() const;
    std::string name() const;

    bool operator==(const LocalClifford&) const = default;

   private:
    explicit constexpr LocalClifford(std::uint8_t index) : index_(index) {}
    std::uint8_t index_ = 0;
};

// Phase-tracked single-qubit Pauli product: a * b = i^phase * result.
struct PauliProduct {
    Pauli result;
    int phase;  // mod 4
};
PauliProduct multiply_paulis(Pauli a, Pauli b);

}  // namespace ballistic
