#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ballistic/clifford.h"
#include "ballistic/rng.h"

namespace ballistic {

struct PauliString {
    std::vector<Pauli> ops;
    bool negative = false;

    PauliString() = default;
    explicit PauliString(std::size_t n) : ops(n, Pauli::I) {}
    // "+XZI", "-YY", "ZZ".
    static PauliString parse(std::string_view text);
    static PauliString single(std::size_t n, std::size_t q, Pauli p);
    std::string str() const;
    bool operator==(const PauliString&) const = default;
};

// Aaronson-Gottesman tableau with destabilizers; brute-force oracle for small
// registers.
class DenseStabilizerState {
   public:
    static constexpr std::size_t kMaxQubits = 12;

    // |0...0>.
    explicit DenseStabilizerState(std::size_t qubit_count);

    std::size_t qubit_count() const { return n_; }

    void h(std::size_t q);
    void s(std::size_t q);
    void cnot(std::size_t control, std::size_t target);
    void cz(std::size_t a, std::size_t b);
    void apply_pauli(std::size_t q, Pauli p);
    void apply(std::size_t q, LocalClifford c);

    // Expectation of a Pauli observable when it is +-1, nullopt when the
    // outcome is uniformly random.
    std::optional<int> expectation(const PauliString& obs) const;
    int measure(const PauliString& obs, CounterRng& rng);
    // Uses `outcome` when random; deterministic results are returned as is.
    int measure_forced(const PauliString& obs, int outcome, bool* deterministic = nullptr);
    int measure(std::size_t q, Pauli basis, CounterRng& rng);

    // Reduced row-echelon generators; equal lists <=> equal states.
    std::vector<PauliString> canonical_stabilizers() const;
    bool same_state(const DenseStabilizerState& other) const;
    // Equal stabilizer groups ignoring signs, i.e. equal up to a Pauli frame.
    bool same_state_up_to_pauli(const DenseStabilizerState& other) const;
    std::string canonical_string() const;

    // Stabilizer generator i (0 <= i < n).
    PauliString stabilizer(std::size_t i) const;

   private:
    std::uint8_t& x(std::size_t row, std::size_t q) { return x_[row * n_ + q]; }
    std::uint8_t& z(std::size_t row, std::size_t q) { return z_[row * n_ + q]; }
    std::uint8_t x(std::size_t row, std::size_t q) const { return x_[row * n_ + q]; }
    std::uint8_t z(std::size_t row, std::size_t q) const { return z_[row * n_ + q]; }
    void rowsum(std::size_t h, std::size_t i);
    bool anticommutes(std::size_t row, const PauliString& obs) const;
    int measure_impl(const PauliString& obs, std::optional<int> forced, CounterRng* rng, bool* deterministic);
    void check_obs(const PauliString& obs) const;

    std::size_t n_;
    // Rows 0..n-1 destabilizers, n..2n-1 stabilizers, row 2n scratch.
    std::vector<std::uint8_t> x_, z_, r_;
};

}  // namespace ballistic
