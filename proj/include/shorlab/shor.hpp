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

// Compiled Shor experiment with a semiclassical QFT.
//
// The period register is a single qubit reused over n_p stages. Stage k
// controls multiplication by a^(2^(n_p-1-k)) mod N, corrects the phase with
// the bits measured so far and measures bit b_k. The phase estimate is
// s = sum_k b_k 2^k, so the first measured bit is the least significant.
// Each stage is its own circuit; the computational-register state entering
// stage k is computed classically by exact projection on the earlier bits.
//
// Layout of a stage circuit: qubit 0 is the period qubit, qubits 1..n_q
// hold the computational register with qubit 1 as its LSB.

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "shorlab/circuit.hpp"
#include "shorlab/noise.hpp"
#include "shorlab/random.hpp"
#include "shorlab/state_vector.hpp"

namespace shorlab {

// ---------------------------------------------------------------------------
// Number theory

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    if (m == 1) return 0;
    std::uint64_t result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1u) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

/// Raised when the base shares a factor with N, which factors N classically.
class NonCoprimeBase : public std::invalid_argument {
public:
    NonCoprimeBase(std::uint64_t a, std::uint64_t n, std::uint64_t factor)
        : std::invalid_argument("gcd(" + std::to_string(a) + ", " + std::to_string(n) + ") = " +
                                std::to_string(factor) + " is a factor of " + std::to_string(n)),
          factor_(factor) {}

    std::uint64_t factor() const noexcept { return factor_; }

private:
    std::uint64_t factor_;
};

inline void require_coprime(std::uint64_t a, std::uint64_t n) {
    if (const std::uint64_t g = std::gcd(a, n); g != 1) throw NonCoprimeBase(a, n, g);
}

/// Smallest r >= 1 with a^r = 1 mod N, by direct iteration.
inline std::uint64_t classical_order(std::uint64_t a, std::uint64_t n) {
    if (n < 2) throw std::invalid_argument("modulus must be at least 2");
    require_coprime(a, n);
    std::uint64_t x = a % n;
    for (std::uint64_t r = 1; r <= n; ++r) {
        if (x == 1) return r;
        x = mulmod(x, a, n);
    }
    throw std::logic_error("order search did not terminate");
}

inline std::size_t bits_for(std::uint64_t n) {
    // ceil(log2 n)
    return n <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(n - 1));
}

// ---------------------------------------------------------------------------
// Configuration

inline constexpr std::size_t kMaxPeriodBits = 8;
inline constexpr std::size_t kMaxRegisterQubits = 16;

struct ShorConfig {
    std::uint64_t N = 15;
    std::uint64_t a = 2;
    std::size_t n_p = 3;
    std::size_t n_q = 0;  // 0 selects ceil(log2 N)
    std::uint64_t shots = 1000;
    std::uint64_t seed = 0;
    std::optional<NoiseModel> noise;

    std::size_t register_qubits() const { return n_q == 0 ? bits_for(N) : n_q; }
    std::size_t Q() const { return std::size_t{1} << n_p; }

    /// Throws NonCoprimeBase when gcd(a, N) > 1 and std::invalid_argument for
    /// every other violation.
    void validate() const {
        if (N < 9 || N % 2 == 0) throw std::invalid_argument("N must be an odd composite number, got " + std::to_string(N));
        bool composite = false;
        for (std::uint64_t d = 3; d * d <= N; d += 2) composite = composite || N % d == 0;
        if (!composite) throw std::invalid_argument("N must be composite, got prime " + std::to_string(N));
        if (a <= 1 || a >= N) throw std::invalid_argument("base must satisfy 1 < a < N");
        if (n_p < 1 || n_p > kMaxPeriodBits) {
            throw std::invalid_argument("n_p must be between 1 and " + std::to_string(kMaxPeriodBits));
        }
        const std::size_t nq = register_qubits();
        if (nq < bits_for(N)) throw std::invalid_argument("n_q must be at least ceil(log2 N)");
        if (nq > kMaxRegisterQubits) throw std::invalid_argument("n_q above " + std::to_string(kMaxRegisterQubits));
        if (noise) noise->validate();
        require_coprime(a, N);
    }
};

// ---------------------------------------------------------------------------
// Circuit building blocks

/// x -> a^e x mod N on [0, N), identity on [N, 2^n_q).
inline Permutation mef_permutation(std::uint64_t a, std::uint64_t e, std::uint64_t n, std::size_t n_q) {
    if (n_q > kMaxRegisterQubits) throw std::invalid_argument("register too wide");
    if ((std::uint64_t{1} << n_q) < n) throw std::invalid_argument("register cannot hold values below N");
    require_coprime(a, n);
    const std::uint64_t factor = powmod(a, e, n);
    std::vector<std::uint32_t> map(std::size_t{1} << n_q);
    for (std::uint64_t x = 0; x < map.size(); ++x)
        map[x] = static_cast<std::uint32_t>(x < n ? mulmod(factor, x, n) : x);
    return Permutation(std::move(map));
}

/// theta_k = -pi * sum_{j<k} b_j 2^(j-k)
inline double feedforward_phase(std::span<const int> prior_bits, std::size_t k) {
    if (prior_bits.size() != k) throw std::invalid_argument("feed-forward needs exactly k prior bits");
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (prior_bits[j] != 0 && prior_bits[j] != 1) throw std::invalid_argument("bits must be 0 or 1");
        acc += prior_bits[j] * std::ldexp(1.0, static_cast<int>(j) - static_cast<int>(k));
    }
    return -std::numbers::pi * acc;
}

inline std::vector<std::size_t> stage_register_qubits(std::size_t n_q) {
    std::vector<std::size_t> reg(n_q);
    std::iota(reg.begin(), reg.end(), std::size_t{1});
    return reg;
}

/// Circuit for stage k: H, controlled multiplication by a^(2^(n_p-1-k)),
/// feed-forward phase, H, measurement into classical bit k. Stage 0 also
/// prepares the register in |0...01>. Identity multiplications and zero
/// phases are omitted.
inline Circuit build_stage_circuit(const ShorConfig& cfg, std::size_t k, std::span<const int> prior_bits) {
    if (k >= cfg.n_p) throw std::invalid_argument("stage index " + std::to_string(k) + " out of range");
    const std::size_t nq = cfg.register_qubits();
    Circuit c(1 + nq, cfg.n_p);
    if (k == 0) c.add(GateOp::x(1));
    c.add(GateOp::h(0));
    Permutation perm = mef_permutation(cfg.a, std::uint64_t{1} << (cfg.n_p - 1 - k), cfg.N, nq);
    if (!perm.is_identity()) {
        const std::size_t id = c.add_permutation(std::move(perm));
        c.add(GateOp::cperm(0, stage_register_qubits(nq), id));
    }
    if (const double theta = feedforward_phase(prior_bits, k); theta != 0.0) c.add(GateOp::phase(0, theta));
    c.add(GateOp::h(0));
    c.add(GateOp::measure(0, k));
    return c;
}

/// Appends the inverse QFT on `qubits` (qubits[0] is the LSB):
/// |x> -> Q^{-1/2} sum_y e^{-2 pi i x y / Q} |y>.
inline void append_inverse_qft(Circuit& c, std::span<const std::size_t> qubits) {
    const std::size_t n = qubits.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t a = qubits[i], b = qubits[n - 1 - i];
        c.add(GateOp::cnot(a, b)).add(GateOp::cnot(b, a)).add(GateOp::cnot(a, b));
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t m = 0; m < j; ++m) {
            c.add(GateOp::cphase(qubits[m], qubits[j], -std::numbers::pi / static_cast<double>(std::size_t{1} << (j - m))));
        }
        c.add(GateOp::h(qubits[j]));
    }
}

/// Textbook order-finding circuit without measurements: period qubits
/// 0..n_p-1 (qubit j controls multiplication by a^(2^j)), register qubits
/// n_p..n_p+n_q-1, inverse QFT on the period register.
inline Circuit build_monolithic_circuit(const ShorConfig& cfg) {
    const std::size_t nq = cfg.register_qubits();
    const std::size_t np = cfg.n_p;
    Circuit c(np + nq, np);
    c.add(GateOp::x(np));
    std::vector<std::size_t> period(np), reg(nq);
    std::iota(period.begin(), period.end(), std::size_t{0});
    std::iota(reg.begin(), reg.end(), np);
    for (std::size_t j = 0; j < np; ++j) c.add(GateOp::h(j));
    for (std::size_t j = 0; j < np; ++j) {
        Permutation perm = mef_permutation(cfg.a, std::uint64_t{1} << j, cfg.N, nq);
        if (perm.is_identity()) continue;
        const std::size_t id = c.add_permutation(std::move(perm));
        c.add(GateOp::cperm(j, reg, id));
    }
    append_inverse_qft(c, period);
    return c;
}

/// Exact distribution of the uncompiled circuit over s in [0, Q).
inline std::vector<double> run_monolithic(const ShorConfig& cfg) {
    cfg.validate();
    const Circuit c = build_monolithic_circuit(cfg);
    StateVector s(c.n_qubits());
    apply_unitary_part(s, c);
    std::vector<std::size_t> period(cfg.n_p);
    std::iota(period.begin(), period.end(), std::size_t{0});
    return distribution(s, std::span<const std::size_t>(period));
}

// ---------------------------------------------------------------------------
// Staged execution

inline std::uint32_t bits_to_index(std::span<const int> bits) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) v |= static_cast<std::uint32_t>(bits[i]) << i;
    return v;
}

inline std::vector<int> index_to_bits(std::uint32_t v, std::size_t k) {
    std::vector<int> bits(k);
    for (std::size_t i = 0; i < k; ++i) bits[i] = static_cast<int>((v >> i) & 1u);
    return bits;
}

/// |0>_p (x) |register>
inline StateVector inject_register(const StateVector& reg) {
    std::vector<Complex> amps(2 * reg.dim(), Complex{0.0, 0.0});
    for (std::size_t x = 0; x < reg.dim(); ++x) amps[x << 1] = reg[x];
    return StateVector::from_amplitudes(std::move(amps));
}

/// Register state of |bit>_p (x) |phi> after projecting the period qubit.
inline StateVector extract_register(const StateVector& s, int bit) {
    std::vector<Complex> amps(s.dim() / 2);
    for (std::size_t x = 0; x < amps.size(); ++x) amps[x] = s[(x << 1) | static_cast<std::size_t>(bit)];
    return StateVector::from_amplitudes(std::move(amps), 1e-9);
}

/// One measurement branch: the bits measured before a stage and the exact
/// computational-register state that enters the stage.
struct StageBranch {
    std::vector<int> prior_bits;
    double probability = 0.0;  // of observing prior_bits
    double theta = 0.0;        // feed-forward angle applied in this stage
    StateVector register_state{0};
    std::size_t prep_steps = 0;  // modular multiplications composing register_state, plus the initial |1>
};

struct StagedExactResult {
    std::vector<double> probabilities;              // over s
    std::vector<std::vector<StageBranch>> stages;  // stages[k] has 2^k branches

    /// Number of distinct conditional states entering stage k.
    std::size_t states_entering(std::size_t k) const { return stages.at(k).size(); }
    /// Sum over stages of the classical preparation steps of the deepest branch.
    std::size_t total_prep_steps() const {
        std::size_t total = 0;
        for (const auto& st : stages) {
            std::size_t deepest = 0;
            for (const auto& b : st) deepest = std::max(deepest, b.prep_steps);
            total += deepest;
        }
        return total;
    }

    /// Register state to prepare before stage k given the recorded prior bits.
    const StateVector& conditional_state(std::size_t k, std::span<const int> prior_bits) const {
        return stages.at(k).at(bits_to_index(prior_bits)).register_state;
    }
};

/// Branch probabilities below this are treated as unreachable when choosing
/// which register state a later stage receives.
inline constexpr double kUnreachableBranch = 1e-12;

/// Enumerates every measurement branch of the staged circuit. The state
/// handed to the next stage is the exact projection of the simulated state
/// on the measured bit. For an unreachable branch the register is left
/// unchanged by the stage, so the sibling branch's state is reused.
inline StagedExactResult run_staged_exact(const ShorConfig& cfg) {
    cfg.validate();
    const std::size_t nq = cfg.register_qubits();
    StagedExactResult out;
    out.probabilities.assign(cfg.Q(), 0.0);

    StageBranch root;
    root.probability = 1.0;
    root.register_state = StateVector(nq, 1);
    root.prep_steps = 1;
    std::vector<StageBranch> current{root};

    for (std::size_t k = 0; k < cfg.n_p; ++k) {
        std::vector<StageBranch> next(current.size() * 2);
        for (auto& branch : current) {
            const Circuit c = build_stage_circuit(cfg, k, branch.prior_bits);
            branch.theta = feedforward_phase(branch.prior_bits, k);
            // Stage 0 prepares its own register from |0...0>.
            StateVector s = k == 0 ? StateVector(1 + nq) : inject_register(branch.register_state);
            apply_unitary_part(s, c);

            const double p1 = probability_of_one(s, 0);
            const double pb[2] = {1.0 - p1, p1};
            std::optional<StateVector> reg[2];
            for (int b = 0; b < 2; ++b) {
                if (pb[b] < kUnreachableBranch) continue;
                StateVector proj = s;
                project(proj, 0, b);
                reg[b] = extract_register(proj, b);
            }
            const std::uint32_t base = bits_to_index(branch.prior_bits);
            for (int b = 0; b < 2; ++b) {
                StageBranch child;
                child.prior_bits = branch.prior_bits;
                child.prior_bits.push_back(b);
                child.probability = branch.probability * std::max(pb[b], 0.0);
                child.register_state = reg[b] ? *reg[b] : *reg[1 - b];
                child.prep_steps = branch.prep_steps + 1;
                next[base | (std::uint32_t{static_cast<std::uint32_t>(b)} << k)] = std::move(child);
            }
        }
        out.stages.push_back(std::move(current));
        current = std::move(next);
    }
    for (const auto& leaf : current) out.probabilities[bits_to_index(leaf.prior_bits)] = leaf.probability;
    return out;
}

// ---------------------------------------------------------------------------
// Sampling

struct PhaseHistogram {
    std::size_t Q = 0;
    std::vector<std::uint64_t> counts;
    std::uint64_t shots = 0;

    PhaseHistogram() = default;
    explicit PhaseHistogram(std::size_t q) : Q(q), counts(q, 0) {}

    static PhaseHistogram from_counts(std::vector<std::uint64_t> counts) {
        PhaseHistogram h(counts.size());
        h.counts = std::move(counts);
        h.shots = std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0});
        return h;
    }

    void add(std::size_t s) {
        counts.at(s) += 1;
        ++shots;
    }

    std::vector<double> frequencies() const {
        if (shots == 0) throw std::domain_error("empty histogram");
        std::vector<double> f(Q);
        for (std::size_t i = 0; i < Q; ++i) f[i] = static_cast<double>(counts[i]) / static_cast<double>(shots);
        return f;
    }

    friend bool operator==(const PhaseHistogram&, const PhaseHistogram&) = default;
};

struct ShotRecord {
    std::uint64_t shot = 0;
    std::vector<int> bits;  // b_0 .. b_{n_p-1}
    std::uint32_t s = 0;
    friend bool operator==(const ShotRecord&, const ShotRecord&) = default;
};

struct SampledRun {
    PhaseHistogram histogram;
    std::vector<ShotRecord> shots;  // ordered by shot index
};

/// Stage circuits for every branch, built once per run.
class StagePlan {
public:
    explicit StagePlan(const ShorConfig& cfg) : exact_(run_staged_exact(cfg)) {
        for (std::size_t k = 0; k < cfg.n_p; ++k) {
            std::vector<Circuit> per_branch;
            for (std::uint32_t v = 0; v < (1u << k); ++v) per_branch.push_back(build_stage_circuit(cfg, k, index_to_bits(v, k)));
            circuits_.push_back(std::move(per_branch));
        }
        for (std::size_t k = 0; k < cfg.n_p; ++k) {
            std::vector<StateVector> states;
            for (const auto& b : exact_.stages[k])
                states.push_back(k == 0 ? StateVector(1 + cfg.register_qubits()) : inject_register(b.register_state));
            inputs_.push_back(std::move(states));
        }
    }

    const StagedExactResult& exact() const noexcept { return exact_; }

    /// Runs the n_p stage circuits of one shot. The recorded (possibly
    /// readout-corrupted) bits select both the next feed-forward angle and
    /// the next prepared state, as the classical controller would.
    ShotRecord run_shot(std::uint64_t shot, const NoiseModel& model, RandomSource& rng) const {
        ShotRecord rec;
        rec.shot = shot;
        for (std::size_t k = 0; k < circuits_.size(); ++k) {
            const std::uint32_t idx = bits_to_index(rec.bits);
            StateVector s = inputs_[k][idx];
            const auto record = run_trajectory(circuits_[k][idx], s, model, rng);
            rec.bits.push_back(record[k]);
        }
        rec.s = bits_to_index(rec.bits);
        return rec;
    }

private:
    StagedExactResult exact_;
    std::vector<std::vector<Circuit>> circuits_;
    std::vector<std::vector<StateVector>> inputs_;
};

/// Samples `cfg.shots` staged runs. Shot i draws from its own substream
/// RandomSource::for_shot(seed, i), so results do not depend on `threads`.
inline SampledRun run_staged_sampled(const ShorConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    if (cfg.shots == 0) throw std::invalid_argument("shots must be at least 1");
    const StagePlan plan(cfg);
    const NoiseModel model = cfg.noise.value_or(NoiseModel::none());

    SampledRun run;
    run.shots.resize(cfg.shots);
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(cfg.shots, 256))));
    auto work = [&](unsigned w) {
        for (std::uint64_t i = w; i < cfg.shots; i += workers) {
            RandomSource rng = RandomSource::for_shot(cfg.seed, i);
            run.shots[i] = plan.run_shot(i, model, rng);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    run.histogram = PhaseHistogram(cfg.Q());
    for (const auto& r : run.shots) run.histogram.add(r.s);
    return run;
}

// ---------------------------------------------------------------------------
// Classical post-processing

struct FactorResult {
    enum class Outcome { Factors, OddPeriod, Trivial, ZeroPeriod };
    Outcome outcome = Outcome::Trivial;
    std::uint64_t p = 0;
    std::uint64_t q = 0;
    std::uint64_t r = 0;

    bool ok() const noexcept { return outcome == Outcome::Factors; }
};

inline std::string_view to_string(FactorResult::Outcome o) {
    switch (o) {
        case FactorResult::Outcome::Factors: return "factors";
        case FactorResult::Outcome::OddPeriod: return "failure_odd_period";
        case FactorResult::Outcome::Trivial: return "failure_trivial";
        case FactorResult::Outcome::ZeroPeriod: return "failure_zero_period";
    }
    return "?";
}

/// gcd(a^(r/2) +- 1, N) factoring step for a candidate period r.
inline FactorResult extract_factors(std::uint64_t a, std::uint64_t r, std::uint64_t n) {
    FactorResult res;
    res.r = r;
    if (r == 0) {
        res.outcome = FactorResult::Outcome::ZeroPeriod;
        return res;
    }
    if (r % 2 == 1) {
        res.outcome = FactorResult::Outcome::OddPeriod;
        return res;
    }
    const std::uint64_t half = powmod(a, r / 2, n);
    const std::uint64_t g_plus = std::gcd((half + 1) % n, n);
    const std::uint64_t g_minus = std::gcd((half + n - 1) % n, n);
    const auto nontrivial = [n](std::uint64_t g) { return g > 1 && g < n; };
    if (g_plus == 1 || !(nontrivial(g_plus) || nontrivial(g_minus))) {
        res.outcome = FactorResult::Outcome::Trivial;
        return res;
    }
    const std::uint64_t g = nontrivial(g_plus) ? g_plus : g_minus;
    res.p = std::min(g, n / g);
    res.q = std::max(g, n / g);
    res.outcome = FactorResult::Outcome::Factors;
    return res;
}

}  // namespace shorlab
