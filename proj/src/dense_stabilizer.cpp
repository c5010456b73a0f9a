#include "ballistic/dense_stabilizer.h"

#include <algorithm>

#include "ballistic/errors.h"

namespace ballistic {

PauliString PauliString::parse(std::string_view text) {
    PauliString p;
    if (!text.empty() && (text[0] == '+' || text[0] == '-')) {
        p.negative = text[0] == '-';
        text.remove_prefix(1);
    }
    for (char c : text) {
        p.ops.push_back(pauli_from_char(c));
    }
    return p;
}

PauliString PauliString::single(std::size_t n, std::size_t q, Pauli p) {
    PauliString s(n);
    s.ops.at(q) = p;
    return s;
}

std::string PauliString::str() const {
    std::string out(1, negative ? '-' : '+');
    for (Pauli p : ops) {
        out += pauli_char(p);
    }
    return out;
}

DenseStabilizerState::DenseStabilizerState(std::size_t qubit_count) : n_(qubit_count) {
    if (n_ > kMaxQubits) {
        throw CapacityError("dense stabilizer oracle supports at most " + std::to_string(kMaxQubits) + " qubits");
    }
    x_.assign((2 * n_ + 1) * n_, 0);
    z_.assign((2 * n_ + 1) * n_, 0);
    r_.assign(2 * n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) {
        x(i, i) = 1;
        z(i + n_, i) = 1;
    }
}

void DenseStabilizerState::h(std::size_t q) {
    for (std::size_t row = 0; row < 2 * n_; ++row) {
        r_[row] ^= x(row, q) & z(row, q);
        std::swap(x(row, q), z(row, q));
    }
}

void DenseStabilizerState::s(std::size_t q) {
    for (std::size_t row = 0; row < 2 * n_; ++row) {
        r_[row] ^= x(row, q) & z(row, q);
        z(row, q) ^= x(row, q);
    }
}

void DenseStabilizerState::cnot(std::size_t a, std::size_t b) {
    for (std::size_t row = 0; row < 2 * n_; ++row) {
        r_[row] ^= x(row, a) & z(row, b) & (x(row, b) ^ z(row, a) ^ 1);
        x(row, b) ^= x(row, a);
        z(row, a) ^= z(row, b);
    }
}

void DenseStabilizerState::cz(std::size_t a, std::size_t b) {
    h(b);
    cnot(a, b);
    h(b);
}

void DenseStabilizerState::apply_pauli(std::size_t q, Pauli p) {
    for (std::size_t row = 0; row < 2 * n_; ++row) {
        r_[row] ^= (has_x(p) & z(row, q)) ^ (has_z(p) & x(row, q));
    }
}

void DenseStabilizerState::apply(std::size_t q, LocalClifford c) {
    for (char g : c.word()) {
        if (g == 'H') {
            h(q);
        } else {
            s(q);
        }
    }
}

namespace {

int g_phase(int x1, int z1, int x2, int z2) {
    if (x1 == 0 && z1 == 0) {
        return 0;
    }
    if (x1 == 1 && z1 == 1) {
        return z2 - x2;
    }
    if (x1 == 1) {
        return z2 * (2 * x2 - 1);
    }
    return x2 * (1 - 2 * z2);
}

}  // namespace

void DenseStabilizerState::rowsum(std::size_t h, std::size_t i) {
    int sum = 2 * r_[h] + 2 * r_[i];
    for (std::size_t q = 0; q < n_; ++q) {
        sum += g_phase(x(i, q), z(i, q), x(h, q), z(h, q));
        x(h, q) ^= x(i, q);
        z(h, q) ^= z(i, q);
    }
    r_[h] = static_cast<std::uint8_t>((((sum % 4) + 4) % 4) == 2);
}

bool DenseStabilizerState::anticommutes(std::size_t row, const PauliString& obs) const {
    int acc = 0;
    for (std::size_t q = 0; q < n_; ++q) {
        acc ^= (x(row, q) & has_z(obs.ops[q])) ^ (z(row, q) & has_x(obs.ops[q]));
    }
    return acc != 0;
}

void DenseStabilizerState::check_obs(const PauliString& obs) const {
    if (obs.ops.size() != n_) {
        throw ShapeError("observable length does not match qubit count");
    }
}

std::optional<int> DenseStabilizerState::expectation(const PauliString& obs) const {
    check_obs(obs);
    for (std::size_t p = n_; p < 2 * n_; ++p) {
        if (anticommutes(p, obs)) {
            return std::nullopt;
        }
    }
    auto copy = *this;
    std::size_t scratch = 2 * n_;
    for (std::size_t q = 0; q < n_; ++q) {
        copy.x(scratch, q) = 0;
        copy.z(scratch, q) = 0;
    }
    copy.r_[scratch] = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (copy.anticommutes(i, obs)) {
            copy.rowsum(scratch, i + n_);
        }
    }
    bool neg = (copy.r_[scratch] != 0) ^ obs.negative;
    return neg ? -1 : +1;
}

int DenseStabilizerState::measure_impl(const PauliString& obs, std::optional<int> forced, CounterRng* rng,
                                       bool* deterministic) {
    check_obs(obs);
    std::size_t p = 2 * n_;
    for (std::size_t row = n_; row < 2 * n_; ++row) {
        if (anticommutes(row, obs)) {
            p = row;
            break;
        }
    }
    if (p == 2 * n_) {
        if (deterministic) {
            *deterministic = true;
        }
        return *expectation(obs);
    }
    if (deterministic) {
        *deterministic = false;
    }
    for (std::size_t row = 0; row < 2 * n_; ++row) {
        if (row != p && anticommutes(row, obs)) {
            rowsum(row, p);
        }
    }
    std::size_t d = p - n_;
    for (std::size_t q = 0; q < n_; ++q) {
        x(d, q) = x(p, q);
        z(d, q) = z(p, q);
        x(p, q) = has_x(obs.ops[q]);
        z(p, q) = has_z(obs.ops[q]);
    }
    r_[d] = r_[p];
    int outcome = forced ? *forced : (rng->bernoulli(0.5) ? -1 : +1);
    r_[p] = static_cast<std::uint8_t>((outcome == -1) ^ obs.negative);
    return outcome;
}

int DenseStabilizerState::measure(const PauliString& obs, CounterRng& rng) {
    return measure_impl(obs, std::nullopt, &rng, nullptr);
}

int DenseStabilizerState::measure_forced(const PauliString& obs, int outcome, bool* deterministic) {
    return measure_impl(obs, outcome, nullptr, deterministic);
}

int DenseStabilizerState::measure(std::size_t q, Pauli basis, CounterRng& rng) {
    return measure(PauliString::single(n_, q, basis), rng);
}

PauliString DenseStabilizerState::stabilizer(std::size_t i) const {
    PauliString p(n_);
    for (std::size_t q = 0; q < n_; ++q) {
        p.ops[q] = static_cast<Pauli>(x(i + n_, q) | (z(i + n_, q) << 1));
    }
    p.negative = r_[i + n_] != 0;
    return p;
}

std::vector<PauliString> DenseStabilizerState::canonical_stabilizers() const {
    auto t = *this;
    std::size_t top = t.n_;
    auto bit = [&](std::size_t row, std::size_t col) {
        std::size_t q = col / 2;
        return col % 2 == 0 ? t.x(row, q) : t.z(row, q);
    };
    for (std::size_t col = 0; col < 2 * t.n_ && top < 2 * t.n_; ++col) {
        std::size_t pivot = 2 * t.n_;
        for (std::size_t row = top; row < 2 * t.n_; ++row) {
            if (bit(row, col)) {
                pivot = row;
                break;
            }
        }
        if (pivot == 2 * t.n_) {
            continue;
        }
        if (pivot != top) {
            for (std::size_t q = 0; q < t.n_; ++q) {
                std::swap(t.x(pivot, q), t.x(top, q));
                std::swap(t.z(pivot, q), t.z(top, q));
            }
            std::swap(t.r_[pivot], t.r_[top]);
        }
        for (std::size_t row = t.n_; row < 2 * t.n_; ++row) {
            if (row != top && bit(row, col)) {
                t.rowsum(row, top);
            }
        }
        ++top;
    }
    std::vector<PauliString> out;
    out.reserve(t.n_);
    for (std::size_t i = 0; i < t.n_; ++i) {
        out.push_back(t.stabilizer(i));
    }
    return out;
}

bool DenseStabilizerState::same_state(const DenseStabilizerState& other) const {
    return n_ == other.n_ && canonical_stabilizers() == other.canonical_stabilizers();
}

bool DenseStabilizerState::same_state_up_to_pauli(const DenseStabilizerState& other) const {
    if (n_ != other.n_) {
        return false;
    }
    auto a = canonical_stabilizers();
    auto b = other.canonical_stabilizers();
    for (std::size_t i = 0; i < n_; ++i) {
        if (a[i].ops != b[i].ops) {
            return false;
        }
    }
    return true;
}

std::string DenseStabilizerState::canonical_string() const {
    std::string out;
    for (const auto& p : canonical_stabilizers()) {
        out += p.str();
        out += '\n';
    }
    return out;
}

}  // namespace ballistic
