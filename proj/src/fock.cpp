#include "ballistic/fock.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "ballistic/errors.h"

namespace ballistic {

namespace {

constexpr int kBitsPerMode = 4;

double factorial(int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

}  // namespace

FockState::FockState(std::size_t mode_count) : modes_(mode_count) {
    if (modes_ > kMaxModes) {
        throw CapacityError("Fock oracle supports at most " + std::to_string(kMaxModes) + " modes");
    }
}

FockState FockState::basis(const Occupation& occupation) {
    FockState s(occupation.size());
    s.add(occupation, 1.0);
    return s;
}

std::uint64_t FockState::key(const Occupation& occupation) const {
    if (occupation.size() != modes_) {
        throw ShapeError("occupation length " + std::to_string(occupation.size()) + " != mode count " +
                         std::to_string(modes_));
    }
    std::uint64_t k = 0;
    std::size_t total = 0;
    for (std::size_t m = 0; m < modes_; ++m) {
        total += occupation[m];
        k |= static_cast<std::uint64_t>(occupation[m]) << (kBitsPerMode * m);
    }
    if (total > kMaxPhotons) {
        throw CapacityError("Fock oracle supports at most " + std::to_string(kMaxPhotons) + " photons");
    }
    return k;
}

Occupation FockState::unkey(std::uint64_t k) const {
    Occupation o(modes_);
    for (std::size_t m = 0; m < modes_; ++m) {
        o[m] = static_cast<std::uint8_t>((k >> (kBitsPerMode * m)) & 0xF);
    }
    return o;
}

void FockState::add(const Occupation& occupation, Complex amplitude) { amp_[key(occupation)] += amplitude; }

Complex FockState::amplitude(const Occupation& occupation) const {
    auto it = amp_.find(key(occupation));
    return it == amp_.end() ? Complex{} : it->second;
}

double FockState::norm_squared() const {
    double s = 0;
    for (const auto& [k, a] : amp_) {
        s += std::norm(a);
    }
    return s;
}

std::size_t FockState::max_photon_number() const {
    std::size_t best = 0;
    for (const auto& [k, a] : amp_) {
        auto o = unkey(k);
        std::size_t n = 0;
        for (auto c : o) {
            n += c;
        }
        best = std::max(best, n);
    }
    return best;
}

FockState& FockState::operator*=(Complex c) {
    for (auto& [k, a] : amp_) {
        a *= c;
    }
    return *this;
}

FockState& FockState::operator+=(const FockState& other) {
    if (other.modes_ != modes_) {
        throw ShapeError("adding Fock states with different mode counts");
    }
    for (const auto& [k, a] : other.amp_) {
        amp_[k] += a;
    }
    return *this;
}

std::vector<std::pair<Occupation, Complex>> FockState::terms() const {
    std::map<std::uint64_t, Complex> sorted(amp_.begin(), amp_.end());
    std::vector<std::pair<Occupation, Complex>> out;
    for (const auto& [k, a] : sorted) {
        if (std::abs(a) > 1e-15) {
            out.emplace_back(unkey(k), a);
        }
    }
    return out;
}

Interferometer::Interferometer(std::size_t mode_count) : modes_(mode_count), u_(mode_count * mode_count) {
    if (modes_ > FockState::kMaxModes) {
        throw CapacityError("interferometer supports at most " + std::to_string(FockState::kMaxModes) + " modes");
    }
    for (std::size_t i = 0; i < modes_; ++i) {
        u_[i * modes_ + i] = 1.0;
    }
}

void Interferometer::left_multiply(std::size_t m1, std::size_t m2, Complex a, Complex b, Complex c, Complex d) {
    if (m1 >= modes_ || m2 >= modes_ || m1 == m2) {
        throw ShapeError("interferometer element on invalid modes");
    }
    for (std::size_t col = 0; col < modes_; ++col) {
        Complex r1 = u_[m1 * modes_ + col], r2 = u_[m2 * modes_ + col];
        u_[m1 * modes_ + col] = a * r1 + b * r2;
        u_[m2 * modes_ + col] = c * r1 + d * r2;
    }
}

Interferometer& Interferometer::beamsplitter(std::size_t m1, std::size_t m2, double theta, double phi) {
    const Complex i(0, 1);
    left_multiply(m1, m2, std::cos(theta), i * std::exp(-i * phi) * std::sin(theta),
                  i * std::exp(i * phi) * std::sin(theta), std::cos(theta));
    return *this;
}

Interferometer& Interferometer::phase_shift(std::size_t m, double phi) {
    if (m >= modes_) {
        throw ShapeError("phase shifter on invalid mode");
    }
    Complex f = std::exp(Complex(0, phi));
    for (std::size_t col = 0; col < modes_; ++col) {
        u_[m * modes_ + col] *= f;
    }
    return *this;
}

Interferometer& Interferometer::swap_modes(std::size_t m1, std::size_t m2) {
    left_multiply(m1, m2, 0, 1, 1, 0);
    return *this;
}

Interferometer Interferometer::then(const Interferometer& next) const {
    if (next.modes_ != modes_) {
        throw ShapeError("composing interferometers with different mode counts");
    }
    Interferometer out(modes_);
    for (std::size_t r = 0; r < modes_; ++r) {
        for (std::size_t c = 0; c < modes_; ++c) {
            Complex s = 0;
            for (std::size_t k = 0; k < modes_; ++k) {
                s += next.at(r, k) * at(k, c);
            }
            out.u_[r * modes_ + c] = s;
        }
    }
    return out;
}

double Interferometer::unitarity_deviation() const {
    double worst = 0;
    for (std::size_t r = 0; r < modes_; ++r) {
        for (std::size_t c = 0; c < modes_; ++c) {
            Complex s = 0;
            for (std::size_t k = 0; k < modes_; ++k) {
                s += at(r, k) * std::conj(at(c, k));
            }
            worst = std::max(worst, std::abs(s - (r == c ? 1.0 : 0.0)));
        }
    }
    return worst;
}

Interferometer Interferometer::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    Interferometer* itf = nullptr;
    Interferometer result(0);
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        for (char& ch : line) {
            if (ch == '[' || ch == ']' || ch == ',') {
                ch = ' ';
            }
        }
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) {
            continue;
        }
        auto fail = [&](const std::string& why) {
            return SpecError("interferometer line " + std::to_string(line_no) + ": " + why);
        };
        if (itf == nullptr) {
            long long modes = -1;
            if (word != "interferometer" || !(ls >> modes) || modes < 1) {
                throw fail("expected 'interferometer <modes>'");
            }
            result = Interferometer(static_cast<std::size_t>(modes));
            itf = &result;
            continue;
        }
        std::string extra;
        if (word == "bs") {
            long long m1, m2;
            double theta, phi;
            if (!(ls >> m1 >> m2 >> theta >> phi) || (ls >> extra) || m1 < 0 || m2 < 0) {
                throw fail("expected [bs, m1, m2, theta, phi]");
            }
            itf->beamsplitter(static_cast<std::size_t>(m1), static_cast<std::size_t>(m2), theta, phi);
        } else if (word == "ps") {
            long long m;
            double phi;
            if (!(ls >> m >> phi) || (ls >> extra) || m < 0) {
                throw fail("expected [ps, m, phi]");
            }
            itf->phase_shift(static_cast<std::size_t>(m), phi);
        } else {
            throw fail("unknown element '" + word + "'");
        }
    }
    if (itf == nullptr) {
        throw SpecError("interferometer: missing header");
    }
    return result;
}

FockState apply_interferometer(const FockState& state, const Interferometer& itf) {
    const std::size_t m = state.mode_count();
    if (itf.mode_count() != m) {
        throw ShapeError("interferometer has " + std::to_string(itf.mode_count()) + " modes, state has " +
                         std::to_string(m));
    }
    if (state.max_photon_number() > FockState::kMaxPhotons) {
        throw CapacityError("photon number over the oracle bound");
    }
    FockState out(m);
    for (const auto& [occ, alpha] : state.terms()) {
        // Expand prod_j (sum_i U_ij a_i^dagger)^{n_j} as a polynomial in creation operators.
        std::map<Occupation, Complex> poly{{Occupation(m, 0), alpha}};
        double norm_in = 1;
        for (std::size_t j = 0; j < m; ++j) {
            norm_in *= factorial(occ[j]);
            for (int rep = 0; rep < occ[j]; ++rep) {
                std::map<Occupation, Complex> next;
                for (const auto& [mono, coef] : poly) {
                    for (std::size_t i = 0; i < m; ++i) {
                        Complex u = itf.at(i, j);
                        if (u == Complex{}) {
                            continue;
                        }
                        Occupation o = mono;
                        ++o[i];
                        next[o] += coef * u;
                    }
                }
                poly = std::move(next);
            }
        }
        for (const auto& [mono, coef] : poly) {
            double norm_out = 1;
            for (auto c : mono) {
                norm_out *= factorial(c);
            }
            out.add(mono, coef * std::sqrt(norm_out / norm_in));
        }
    }
    return out;
}

bool DetectionPattern::matches(const Occupation& occupation) const {
    if (occupation.size() != required.size()) {
        throw ShapeError("detection pattern length does not match mode count");
    }
    for (std::size_t m = 0; m < required.size(); ++m) {
        int r = required[m];
        if (r == kAny) {
            continue;
        }
        if (r == kAnyClick) {
            if (occupation[m] == 0) {
                return false;
            }
        } else if (r < 0) {
            throw SpecError("detection pattern count must be non-negative");
        } else if (occupation[m] != r) {
            return false;
        }
    }
    return true;
}

double detection_probability(const FockState& state, const DetectionPattern& pattern) {
    double p = 0;
    for (const auto& [occ, a] : state.terms()) {
        if (pattern.matches(occ)) {
            p += std::norm(a);
        }
    }
    return p;
}

namespace {

// Modes: qubit k occupies (2k: H, 2k+1: V). Fused qubits are 1 and 2.
constexpr std::size_t kModes = 8;

Interferometer type2_network() {
    Interferometer itf(kModes);
    // Polarising beamsplitter: exchange the V rails of the fused qubits.
    itf.swap_modes(3, 5);
    // Port A = modes (2, 3), port B = modes (4, 5); 45-degree rotation in each.
    const double quarter = std::numbers::pi / 4;
    itf.beamsplitter(2, 3, quarter);
    itf.beamsplitter(4, 5, quarter);
    return itf;
}

FockState bell_pair(std::size_t first_qubit, std::size_t second_qubit) {
    // (|HH> + |VV>)/sqrt(2) on dual-rail qubits.
    FockState s(kModes);
    const double r = 1 / std::sqrt(2.0);
    Occupation hh(kModes, 0), vv(kModes, 0);
    hh[2 * first_qubit] = hh[2 * second_qubit] = 1;
    vv[2 * first_qubit + 1] = vv[2 * second_qubit + 1] = 1;
    s.add(hh, r);
    s.add(vv, r);
    return s;
}

FockState tensor(const FockState& a, const FockState& b) {
    FockState out(kModes);
    for (const auto& [oa, ca] : a.terms()) {
        for (const auto& [ob, cb] : b.terms()) {
            Occupation o(kModes);
            for (std::size_t m = 0; m < kModes; ++m) {
                o[m] = static_cast<std::uint8_t>(oa[m] + ob[m]);
            }
            // Disjoint modes: product of normalised basis states is a basis state.
            out.add(o, ca * cb);
        }
    }
    return out;
}

void classify(const Occupation& o, double p, FusionHeraldProbabilities& acc) {
    int port_a = o[2] + o[3];
    int port_b = o[4] + o[5];
    if (port_a == 1 && port_b == 1) {
        acc.success += p;
    } else if ((port_a == 2 && port_b == 0) || (port_a == 0 && port_b == 2)) {
        acc.failure += p;
    } else {
        acc.degenerate += p;
    }
}

}  // namespace

FusionHeraldProbabilities type2_fusion_heralds(bool distinguishable) {
    const auto itf = type2_network();
    FusionHeraldProbabilities acc;
    auto first = bell_pair(0, 1);
    auto second = bell_pair(2, 3);
    if (!distinguishable) {
        auto out = apply_interferometer(tensor(first, second), itf);
        for (const auto& [o, a] : out.terms()) {
            classify(o, std::norm(a), acc);
        }
        return acc;
    }
    // Distinguishable pairs never interfere: propagate each alone and combine
    // the two output distributions.
    auto out1 = apply_interferometer(first, itf).terms();
    auto out2 = apply_interferometer(second, itf).terms();
    for (const auto& [o1, a1] : out1) {
        for (const auto& [o2, a2] : out2) {
            Occupation o(kModes);
            for (std::size_t m = 0; m < kModes; ++m) {
                o[m] = static_cast<std::uint8_t>(o1[m] + o2[m]);
            }
            classify(o, std::norm(a1) * std::norm(a2), acc);
        }
    }
    return acc;
}

double type2_fusion_success_probability() { return type2_fusion_heralds(false).success; }

double hom_coincidence_probability() {
    Interferometer bs(2);
    bs.beamsplitter(0, 1, std::numbers::pi / 4);
    auto out = apply_interferometer(FockState::basis({1, 1}), bs);
    return detection_probability(out, {{1, 1}});
}

}  // namespace ballistic
