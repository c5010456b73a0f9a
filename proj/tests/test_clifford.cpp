#include <gtest/gtest.h>

#include <set>

#include "ballistic/clifford.h"
#include "ballistic/dense_stabilizer.h"

using namespace ballistic;

TEST(clifford, group_has_24_distinct_actions) {
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < LocalClifford::kCount; ++i) {
        auto c = LocalClifford::from_index(i);
        auto x = c.conjugate(Pauli::X);
        auto z = c.conjugate(Pauli::Z);
        seen.insert({static_cast<int>(x.pauli) * 2 + x.negative, static_cast<int>(z.pauli) * 2 + z.negative});
    }
    EXPECT_EQ(seen.size(), 24u);
}

TEST(clifford, named_elements) {
    EXPECT_EQ(LocalClifford::hadamard().conjugate(Pauli::X), (SignedPauli{Pauli::Z, false}));
    EXPECT_EQ(LocalClifford::phase().conjugate(Pauli::X), (SignedPauli{Pauli::Y, false}));
    EXPECT_EQ(LocalClifford::phase().conjugate(Pauli::Y), (SignedPauli{Pauli::X, true}));
    EXPECT_EQ(LocalClifford::sqrt_x().conjugate(Pauli::Z), (SignedPauli{Pauli::Y, true}));
    EXPECT_EQ(LocalClifford::hadamard().conjugate(Pauli::Y), (SignedPauli{Pauli::Y, true}));
    EXPECT_EQ(LocalClifford::pauli(Pauli::X).conjugate(Pauli::Z), (SignedPauli{Pauli::Z, true}));
}

TEST(clifford, multiplication_and_inverse) {
    for (int i = 0; i < 24; ++i) {
        auto a = LocalClifford::from_index(i);
        EXPECT_EQ(a * a.inverse(), LocalClifford::identity());
        EXPECT_EQ(a.inverse() * a, LocalClifford::identity());
        for (int j = 0; j < 24; ++j) {
            auto b = LocalClifford::from_index(j);
            for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
                auto inner = b.conjugate(p);
                auto outer = a.conjugate(inner.pauli);
                outer.negative ^= inner.negative;
                EXPECT_EQ((a * b).conjugate(p), outer);
            }
        }
    }
    auto h = LocalClifford::hadamard();
    EXPECT_EQ(h * h, LocalClifford::identity());
    auto s = LocalClifford::phase();
    EXPECT_EQ(s * s, LocalClifford::pauli(Pauli::Z));
}

TEST(clifford, diagonal_subgroup) {
    int count = 0;
    for (int i = 0; i < 24; ++i) {
        count += LocalClifford::from_index(i).is_diagonal();
    }
    EXPECT_EQ(count, 4);
    EXPECT_TRUE(LocalClifford::phase().is_diagonal());
    EXPECT_FALSE(LocalClifford::hadamard().is_diagonal());
}

TEST(clifford, words_match_tableau_action) {
    for (int i = 0; i < 24; ++i) {
        auto c = LocalClifford::from_index(i);
        for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
            // Prepare the +1 eigenstate of p, apply c, then C p C^dagger must be +1.
            DenseStabilizerState s(1);
            if (p == Pauli::X) {
                s.h(0);
            } else if (p == Pauli::Y) {
                s.h(0);
                s.s(0);
            }
            s.apply(0, c);
            auto img = c.conjugate(p);
            PauliString obs(1);
            obs.ops[0] = img.pauli;
            obs.negative = img.negative;
            EXPECT_EQ(s.expectation(obs), 1) << "clifford " << i << " pauli " << pauli_char(p);
        }
    }
}

TEST(pauli, products_track_phase) {
    EXPECT_EQ(multiply_paulis(Pauli::X, Pauli::Z).result, Pauli::Y);
    EXPECT_EQ(multiply_paulis(Pauli::X, Pauli::Z).phase, 3);  // XZ = -iY
    EXPECT_EQ(multiply_paulis(Pauli::Z, Pauli::X).phase, 1);  // ZX = iY
    EXPECT_EQ(multiply_paulis(Pauli::Y, Pauli::Y).phase, 0);
    EXPECT_TRUE(commutes(Pauli::X, Pauli::X));
    EXPECT_FALSE(commutes(Pauli::X, Pauli::Y));
}
