#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ballistic {

using Complex = std::complex<double>;
using Occupation = std::vector<std::uint8_t>;

// Sparse amplitudes over occupation-number basis vectors.
class FockState {
   public:
    static constexpr std::size_t kMaxPhotons = 6;
    static constexpr std::size_t kMaxModes = 12;

    explicit FockState(std::size_t mode_count);
    static FockState basis(const Occupation& occupation);

    std::size_t mode_count() const { return modes_; }
    void add(const Occupation& occupation, Complex amplitude);
    Complex amplitude(const Occupation& occupation) const;
    double norm_squared() const;
    std::size_t max_photon_number() const;
    FockState& operator*=(Complex c);
    FockState& operator+=(const FockState& other);

    // Occupations with nonzero amplitude, in ascending key order.
    std::vector<std::pair<Occupation, Complex>> terms() const;

   private:
    std::uint64_t key(const Occupation& occupation) const;
    Occupation unkey(std::uint64_t key) const;

    std::size_t modes_;
    std::unordered_map<std::uint64_t, Complex> amp_;
};

// Linear-optical network; elements compose left to right in time order.
class Interferometer {
   public:
    explicit Interferometer(std::size_t mode_count);

    std::size_t mode_count() const { return modes_; }
    // [[cos t, i e^{-i p} sin t], [i e^{i p} sin t, cos t]] on (m1, m2).
    Interferometer& beamsplitter(std::size_t m1, std::size_t m2, double theta, double phi = 0.0);
    Interferometer& phase_shift(std::size_t m, double phi);
    Interferometer& swap_modes(std::size_t m1, std::size_t m2);
    // This network followed by `next`.
    Interferometer then(const Interferometer& next) const;

    Complex at(std::size_t row, std::size_t col) const { return u_[row * modes_ + col]; }
    double unitarity_deviation() const;

    // Text form: header `interferometer <modes>`, then one element per line,
    // `[bs, m1, m2, theta, phi]` or `[ps, m, phi]`; '#' starts a comment.
    static Interferometer parse(std::string_view text);

   private:
    void left_multiply(std::size_t m1, std::size_t m2, Complex a, Complex b, Complex c, Complex d);

    std::size_t modes_;
    std::vector<Complex> u_;
};

FockState apply_interferometer(const FockState& state, const Interferometer& itf);

// Per-mode requirement: a count, kAny (no constraint) or kAnyClick (>= 1).
struct DetectionPattern {
    static constexpr int kAny = -1;
    static constexpr int kAnyClick = -2;
    std::vector<int> required;

    bool matches(const Occupation& occupation) const;
};

double detection_probability(const FockState& state, const DetectionPattern& pattern);

struct FusionHeraldProbabilities {
    double success = 0;     // one photon in each output port
    double failure = 0;     // both photons in one port
    double degenerate = 0;  // anything else
};

// Two dual-rail Bell pairs; the second qubit of the first pair and the first
// qubit of the second pair enter a polarising beamsplitter followed by a
// 45-degree rotation in each output port.
FusionHeraldProbabilities type2_fusion_heralds(bool distinguishable = false);
double type2_fusion_success_probability();

// Coincidence probability of |1,1> behind a balanced beamsplitter.
double hom_coincidence_probability();

}  // namespace ballistic
