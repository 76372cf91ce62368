// Copyright 2026 The shorlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense statevector engine.
//
// Qubit ordering: qubit 0 is the least significant bit of the basis-state
// index. Every register in the library follows this convention, so a
// k-qubit subset {q_0, ..., q_{k-1}} reads the integer sum_i bit(q_i) 2^i.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shorlab/random.hpp"

namespace shorlab {

using Complex = std::complex<double>;

/// Row-major 2x2 matrix {m00, m01, m10, m11}.
using Matrix2 = std::array<Complex, 4>;

inline constexpr double kUnitarityTolerance = 1e-10;
inline constexpr std::size_t kMaxQubits = 24;

namespace gates {

inline Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
inline Matrix2 hadamard() {
    const double s = std::numbers::sqrt2 / 2.0;
    return {s, s, s, -s};
}
inline Matrix2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
inline Matrix2 pauli_y() { return {0.0, Complex(0, -1), Complex(0, 1), 0.0}; }
inline Matrix2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }
/// diag(1, e^{i theta})
inline Matrix2 phase(double theta) { return {1.0, 0.0, 0.0, std::polar(1.0, theta)}; }

inline Matrix2 adjoint(const Matrix2& m) {
    return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
}

inline bool is_unitary(const Matrix2& m, double tol = kUnitarityTolerance) {
    // M^dagger M == I
    const Complex a = std::conj(m[0]) * m[0] + std::conj(m[2]) * m[2];
    const Complex b = std::conj(m[0]) * m[1] + std::conj(m[2]) * m[3];
    const Complex d = std::conj(m[1]) * m[1] + std::conj(m[3]) * m[3];
    return std::abs(a - 1.0) < tol && std::abs(b) < tol && std::abs(d - 1.0) < tol;
}

}  // namespace gates

/// A validated bijection on [0, 2^k).
class Permutation {
public:
    Permutation() = default;

    /// Throws std::invalid_argument unless `map` is a bijection on [0, 2^k)
    /// for some k.
    explicit Permutation(std::vector<std::uint32_t> map) : map_(std::move(map)) {
        const std::size_t n = map_.size();
        if (n == 0 || (n & (n - 1)) != 0) {
            throw std::invalid_argument("permutation size must be a power of two, got " +
                                        std::to_string(n));
        }
        std::vector<bool> seen(n, false);
        for (std::uint32_t v : map_) {
            if (v >= n || seen[v]) {
                throw std::invalid_argument("mapping is not a bijection (value " +
                                            std::to_string(v) + ")");
            }
            seen[v] = true;
        }
        bits_ = static_cast<std::size_t>(std::countr_zero(n));
    }

    static Permutation identity(std::size_t bits) {
        std::vector<std::uint32_t> m(std::size_t{1} << bits);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<std::uint32_t>(i);
        return Permutation(std::move(m));
    }

    std::size_t bits() const noexcept { return bits_; }
    std::size_t size() const noexcept { return map_.size(); }
    std::uint32_t operator()(std::uint32_t x) const { return map_.at(x); }
    const std::vector<std::uint32_t>& map() const noexcept { return map_; }

    bool is_identity() const {
        for (std::size_t i = 0; i < map_.size(); ++i)
            if (map_[i] != i) return false;
        return true;
    }

    Permutation inverse() const {
        std::vector<std::uint32_t> inv(map_.size());
        for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = static_cast<std::uint32_t>(i);
        return Permutation(std::move(inv));
    }

    /// Register bit positions whose value the permutation can change.
    std::vector<std::size_t> active_bits() const {
        std::uint32_t touched = 0;
        for (std::size_t i = 0; i < map_.size(); ++i) touched |= static_cast<std::uint32_t>(i) ^ map_[i];
        std::vector<std::size_t> out;
        for (std::size_t b = 0; b < bits_; ++b)
            if (touched & (1u << b)) out.push_back(b);
        return out;
    }

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::uint32_t> map_;
    std::size_t bits_ = 0;
};

class StateVector {
public:
    /// |0...0> on n qubits.
    explicit StateVector(std::size_t n_qubits) : StateVector(n_qubits, 0) {}

    /// Computational basis state |index>.
    StateVector(std::size_t n_qubits, std::uint64_t index) : n_qubits_(n_qubits) {
        if (n_qubits > kMaxQubits) {
            throw std::invalid_argument("too many qubits: " + std::to_string(n_qubits));
        }
        amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
        if (index >= amps_.size()) throw std::out_of_range("basis index out of range");
        amps_[index] = 1.0;
    }

    /// Takes ownership of the amplitudes; the vector must have length 2^n and unit norm.
    static StateVector from_amplitudes(std::vector<Complex> amps, double tol = 1e-10) {
        const std::size_t n = amps.size();
        if (n == 0 || (n & (n - 1)) != 0) {
            throw std::invalid_argument("amplitude count must be a power of two");
        }
        StateVector s(0);
        s.n_qubits_ = static_cast<std::size_t>(std::countr_zero(n));
        s.amps_ = std::move(amps);
        if (std::abs(s.norm_squared() - 1.0) > tol) {
            throw std::invalid_argument("amplitudes are not normalized");
        }
        return s;
    }

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return amps_.size(); }

    std::span<const Complex> amplitudes() const noexcept { return amps_; }
    std::span<Complex> amplitudes() noexcept { return amps_; }
    const Complex& operator[](std::size_t i) const { return amps_[i]; }
    Complex& operator[](std::size_t i) { return amps_[i]; }

    double norm_squared() const {
        double acc = 0.0;
        for (const auto& a : amps_) acc += std::norm(a);
        return acc;
    }

    void normalize() {
        const double n = std::sqrt(norm_squared());
        if (n == 0.0) throw std::domain_error("cannot normalize the zero vector");
        for (auto& a : amps_) a /= n;
    }

    void check_qubit(std::size_t q) const {
        if (q >= n_qubits_) {
            throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " +
                                    std::to_string(n_qubits_) + " qubits");
        }
    }

private:
    std::size_t n_qubits_ = 0;
    std::vector<Complex> amps_;
};

namespace detail {

inline void check_distinct(const StateVector& s, std::span<const std::size_t> qubits) {
    std::uint64_t mask = 0;
    for (std::size_t q : qubits) {
        s.check_qubit(q);
        if (mask & (std::uint64_t{1} << q)) throw std::invalid_argument("qubits must be distinct");
        mask |= std::uint64_t{1} << q;
    }
}

inline std::uint32_t gather(std::uint64_t index, std::span<const std::size_t> qubits) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < qubits.size(); ++i) v |= static_cast<std::uint32_t>((index >> qubits[i]) & 1u) << i;
    return v;
}

inline std::uint64_t scatter(std::uint64_t index, std::span<const std::size_t> qubits, std::uint32_t value) {
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        const std::uint64_t bit = std::uint64_t{1} << qubits[i];
        index = ((value >> i) & 1u) ? (index | bit) : (index & ~bit);
    }
    return index;
}

// Applies m to `target` on the subspace where all `control_mask` bits are set.
inline void apply_masked(StateVector& s, std::size_t target, const Matrix2& m, std::uint64_t control_mask) {
    const std::size_t step = std::size_t{1} << target;
    const std::size_t dim = s.dim();
    for (std::size_t base = 0; base < dim; base += 2 * step) {
        for (std::size_t j = 0; j < step; ++j) {
            const std::size_t i0 = base + j;
            if ((i0 & control_mask) != control_mask) continue;
            const std::size_t i1 = i0 + step;
            const Complex a0 = s[i0];
            const Complex a1 = s[i1];
            s[i0] = m[0] * a0 + m[1] * a1;
            s[i1] = m[2] * a0 + m[3] * a1;
        }
    }
}

}  // namespace detail

/// Applies a single-qubit unitary. Throws on a bad index or a non-unitary matrix.
inline void apply_matrix(StateVector& s, std::size_t target, const Matrix2& m) {
    s.check_qubit(target);
    if (!gates::is_unitary(m)) throw std::invalid_argument("gate matrix is not unitary");
    detail::apply_masked(s, target, m, 0);
}

/// Applies m to `target` when `control` is |1>.
inline void apply_controlled_matrix(StateVector& s, std::size_t control, std::size_t target, const Matrix2& m) {
    s.check_qubit(control);
    s.check_qubit(target);
    if (control == target) throw std::invalid_argument("control and target must differ");
    if (!gates::is_unitary(m)) throw std::invalid_argument("gate matrix is not unitary");
    detail::apply_masked(s, target, m, std::uint64_t{1} << control);
}

inline void apply_h(StateVector& s, std::size_t q) { apply_matrix(s, q, gates::hadamard()); }
inline void apply_x(StateVector& s, std::size_t q) { apply_matrix(s, q, gates::pauli_x()); }
inline void apply_y(StateVector& s, std::size_t q) { apply_matrix(s, q, gates::pauli_y()); }
inline void apply_z(StateVector& s, std::size_t q) { apply_matrix(s, q, gates::pauli_z()); }
inline void apply_phase(StateVector& s, std::size_t q, double theta) { apply_matrix(s, q, gates::phase(theta)); }
inline void apply_cnot(StateVector& s, std::size_t control, std::size_t target) {
    apply_controlled_matrix(s, control, target, gates::pauli_x());
}
inline void apply_cphase(StateVector& s, std::size_t control, std::size_t target, double theta) {
    apply_controlled_matrix(s, control, target, gates::phase(theta));
}

/// Relabels basis states of the `qubits` subset: |b> -> |perm(b)>. When
/// `control` is given, only the subspace with that qubit set is permuted.
inline void apply_permutation(StateVector& s, std::span<const std::size_t> qubits, const Permutation& perm,
                              std::optional<std::size_t> control = std::nullopt) {
    detail::check_distinct(s, qubits);
    if (perm.bits() != qubits.size()) {
        throw std::invalid_argument("permutation acts on " + std::to_string(perm.bits()) + " bits but " +
                                    std::to_string(qubits.size()) + " qubits were given");
    }
    std::uint64_t control_mask = 0;
    if (control) {
        s.check_qubit(*control);
        for (std::size_t q : qubits)
            if (q == *control) throw std::invalid_argument("control qubit overlaps the permuted register");
        control_mask = std::uint64_t{1} << *control;
    }
    if (perm.is_identity()) return;
    std::vector<Complex> out(s.dim());
    const auto in = s.amplitudes();
    for (std::uint64_t i = 0; i < s.dim(); ++i) {
        if ((i & control_mask) != control_mask) {
            out[i] = in[i];
            continue;
        }
        const std::uint32_t b = detail::gather(i, qubits);
        out[detail::scatter(i, qubits, perm(b))] = in[i];
    }
    std::copy(out.begin(), out.end(), s.amplitudes().begin());
}

inline double probability_of_one(const StateVector& s, std::size_t q) {
    s.check_qubit(q);
    const std::uint64_t bit = std::uint64_t{1} << q;
    double p = 0.0;
    for (std::uint64_t i = 0; i < s.dim(); ++i)
        if (i & bit) p += std::norm(s[i]);
    return p;
}

/// Projects `q` onto `bit` and renormalizes. Returns the branch probability.
/// Throws std::domain_error for a zero-probability branch.
inline double project(StateVector& s, std::size_t q, int bit) {
    s.check_qubit(q);
    double mass = 0.0;
    const std::uint64_t mask = std::uint64_t{1} << q;
    for (std::uint64_t i = 0; i < s.dim(); ++i) {
        const bool set = (i & mask) != 0;
        if (set != static_cast<bool>(bit)) s[i] = 0.0;
        else mass += std::norm(s[i]);
    }
    if (mass <= 0.0) throw std::domain_error("projection onto a zero-probability branch");
    const double scale = 1.0 / std::sqrt(mass);
    for (auto& a : s.amplitudes()) a *= scale;
    return mass;
}

/// Born-rule measurement with collapse.
inline int measure(StateVector& s, std::size_t q, RandomSource& rng) {
    const double p1 = probability_of_one(s, q);
    const int bit = rng.uniform() < p1 ? 1 : 0;
    project(s, q, bit);
    return bit;
}

/// Marginal Born distribution over the `qubits` subset, indexed by
/// sum_i bit(qubits[i]) 2^i.
inline std::vector<double> distribution(const StateVector& s, std::span<const std::size_t> qubits) {
    detail::check_distinct(s, qubits);
    std::vector<double> out(std::size_t{1} << qubits.size(), 0.0);
    for (std::uint64_t i = 0; i < s.dim(); ++i) out[detail::gather(i, qubits)] += std::norm(s[i]);
    return out;
}

inline std::vector<double> distribution(const StateVector& s, std::initializer_list<std::size_t> qubits) {
    const std::vector<std::size_t> q(qubits);
    return distribution(s, std::span<const std::size_t>(q));
}

}  // namespace shorlab
