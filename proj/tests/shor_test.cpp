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


#include "oracles.hpp"
#include "shorlab/analysis.hpp"
#include "shorlab/shor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

using namespace shorlab;

namespace {

ShorConfig config(std::uint64_t n, std::uint64_t a, std::size_t n_p = 3) {
    ShorConfig c;
    c.N = n;
    c.a = a;
    c.n_p = n_p;
    return c;
}

void expect_vectors_near(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "s=" << i;
}

struct Pair {
    std::uint64_t n, a;
};
const Pair kEquivalencePairs[] = {{15, 2}, {15, 11}, {15, 4}, {15, 7}, {15, 8}, {15, 13}, {15, 14}, {21, 2}, {35, 4}};

}  // namespace

TEST(NumberTheory, OrderMatchesBruteForce) {
    EXPECT_EQ(classical_order(2, 21), 6u);
    EXPECT_EQ(classical_order(4, 35), 6u);
    EXPECT_EQ(classical_order(2, 15), 4u);
    EXPECT_EQ(classical_order(11, 15), 2u);
    for (std::uint64_t n = 9; n < 120; n += 2)
        for (std::uint64_t a = 2; a < n; ++a)
            if (std::gcd(a, n) == 1) {
                ASSERT_EQ(classical_order(a, n), oracle::order(a, n)) << a << " mod " << n;
            }
    EXPECT_THROW(classical_order(5, 15), NonCoprimeBase);
}

TEST(NumberTheory, PowmodAndBits) {
    EXPECT_EQ(powmod(4, 3, 35), 29u);
    EXPECT_EQ(powmod(7, 0, 15), 1u);
    EXPECT_EQ(mulmod(0xFFFFFFFFFFFFFFull, 0xFFFFFFFFFFFFFFull, 1000000007ull),
              static_cast<std::uint64_t>((unsigned __int128)0xFFFFFFFFFFFFFFull * 0xFFFFFFFFFFFFFFull % 1000000007ull));
    EXPECT_EQ(bits_for(15), 4u);
    EXPECT_EQ(bits_for(16), 4u);
    EXPECT_EQ(bits_for(21), 5u);
    EXPECT_EQ(bits_for(35), 6u);
}

TEST(Config, Validation) {
    EXPECT_NO_THROW(config(15, 2).validate());
    EXPECT_THROW(config(16, 3).validate(), std::invalid_argument);
    EXPECT_THROW(config(13, 2).validate(), std::invalid_argument);
    EXPECT_THROW(config(15, 1).validate(), std::invalid_argument);
    EXPECT_THROW(config(15, 15).validate(), std::invalid_argument);
    EXPECT_THROW(config(15, 2, 0).validate(), std::invalid_argument);
    EXPECT_THROW(config(15, 2, 9).validate(), std::invalid_argument);
    ShorConfig narrow = config(21, 2);
    narrow.n_q = 4;
    EXPECT_THROW(narrow.validate(), std::invalid_argument);
    try {
        config(15, 5).validate();
        FAIL() << "expected NonCoprimeBase";
    } catch (const NonCoprimeBase& e) {
        EXPECT_EQ(e.factor(), 5u);
    }
    EXPECT_EQ(config(35, 4).register_qubits(), 6u);
    EXPECT_EQ(config(35, 4).Q(), 8u);
}

TEST(Mef, FourthPowerModFifteenIsIdentity) {
    for (std::uint64_t a : {2, 7, 8, 11, 13, 14}) EXPECT_TRUE(mef_permutation(a, 4, 15, 4).is_identity()) << a;
}

TEST(Mef, DoublingModFifteenCycles) {
    const Permutation p = mef_permutation(2, 1, 15, 4);
    const std::pair<std::uint32_t, std::uint32_t> expect[] = {{1, 2}, {2, 4}, {4, 8}, {8, 1},
                                                              {7, 14}, {14, 13}, {13, 11}, {11, 7}};
    for (auto [x, y] : expect) EXPECT_EQ(p(x), y);
    EXPECT_EQ(p(15), 15u);  // outside [0, N)
    EXPECT_EQ(p(0), 0u);
}

TEST(Mef, SquareOfFourModThirtyFive) {
    const Permutation p = mef_permutation(4, 2, 35, 6);
    EXPECT_EQ(p(1), 16u);
    EXPECT_EQ(p(16), 11u);
    for (std::uint32_t x = 35; x < 64; ++x) EXPECT_EQ(p(x), x);
    EXPECT_THROW(mef_permutation(5, 1, 15, 4), NonCoprimeBase);
    EXPECT_THROW(mef_permutation(2, 1, 21, 4), std::invalid_argument);
}

TEST(FeedForward, Angles) {
    EXPECT_EQ(feedforward_phase({}, 0), 0.0);
    const std::vector<int> one{1}, two{1, 1}, low{1, 0}, high{0, 1};
    EXPECT_NEAR(feedforward_phase(one, 1), -std::numbers::pi / 2, 1e-15);
    EXPECT_NEAR(feedforward_phase(two, 2), -3 * std::numbers::pi / 4, 1e-15);
    EXPECT_NEAR(feedforward_phase(low, 2), -std::numbers::pi / 4, 1e-15);
    EXPECT_NEAR(feedforward_phase(high, 2), -std::numbers::pi / 2, 1e-15);
    EXPECT_THROW(feedforward_phase(one, 2), std::invalid_argument);
}

TEST(StageCircuit, FifteenElevenFirstStageIsTwoHadamards) {
    const ShorConfig cfg = config(15, 11);
    const Circuit c = build_stage_circuit(cfg, 0, {});
    EXPECT_EQ(gate_census(c).two_qubit, 0u);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RandomSource rng(seed);
        EXPECT_EQ(noisy_shot(c, NoiseModel::none(), rng)[0], 0);
    }
    StateVector s(c.n_qubits());
    apply_unitary_part(s, c);
    EXPECT_NEAR(probability_of_one(s, 0), 0.0, 1e-15);
}

TEST(StageCircuit, LastStageOfTwentyOneUsesFirstPower) {
    const ShorConfig cfg = config(21, 2);
    const std::vector<int> prior{1, 0};
    const Circuit c = build_stage_circuit(cfg, 2, prior);
    std::size_t cperms = 0;
    for (const auto& op : c.ops())
        if (op.kind == GateKind::CPerm) {
            ++cperms;
            EXPECT_EQ(op.qubits[0], 0u);
            EXPECT_EQ(c.permutations()[op.perm_id], mef_permutation(2, 1, 21, 5));
        }
    EXPECT_EQ(cperms, 1u);
    // phase present and equal to the feed-forward angle
    bool phase = false;
    for (const auto& op : c.ops())
        if (op.kind == GateKind::Phase) {
            phase = true;
            EXPECT_NEAR(op.theta, -std::numbers::pi / 4, 1e-15);
        }
    EXPECT_TRUE(phase);
}

TEST(StageCircuit, FirstStageHasNoPhaseAndPreparesOne) {
    for (const auto& [n, a] : kEquivalencePairs) {
        const Circuit c = build_stage_circuit(config(n, a), 0, {});
        for (const auto& op : c.ops()) EXPECT_NE(op.kind, GateKind::Phase);
        EXPECT_EQ(c.ops().front(), GateOp::x(1));
        EXPECT_EQ(c.ops().back(), GateOp::measure(0, 0));
    }
    EXPECT_THROW(build_stage_circuit(config(15, 2), 3, std::vector<int>{0, 0, 0}), std::invalid_argument);
}

TEST(Monolithic, MatchesExplicitDft) {
    for (const auto& [n, a] : kEquivalencePairs)
        expect_vectors_near(run_monolithic(config(n, a)), oracle::phase_distribution_dft(a, n, 8), 1e-10);
    expect_vectors_near(run_monolithic(config(21, 2, 5)), oracle::phase_distribution_dft(2, 21, 32), 1e-10);
}

TEST(Monolithic, ConstantFunctionGivesZeroPhase) {
    // a = N + 1 acts as 1 on the register; the config contract rejects it, so
    // the circuit is built directly.
    ShorConfig cfg = config(15, 16);
    EXPECT_THROW(run_monolithic(cfg), std::invalid_argument);
    const Circuit c = build_monolithic_circuit(cfg);
    EXPECT_EQ(gate_census(c).two_qubit, 6u);  // inverse-QFT swap (3 CNOTs) and 3 phases only
    StateVector s(c.n_qubits());
    apply_unitary_part(s, c);
    const auto d = distribution(s, {0, 1, 2});
    EXPECT_NEAR(d[0], 1.0, 1e-12);
}

TEST(Staged, KnownDistributions) {
    expect_vectors_near(run_staged_exact(config(15, 2)).probabilities, {0.25, 0, 0.25, 0, 0.25, 0, 0.25, 0}, 1e-12);
    expect_vectors_near(run_staged_exact(config(15, 11)).probabilities, {0.5, 0, 0, 0, 0.5, 0, 0, 0}, 1e-12);
    expect_vectors_near(run_staged_exact(config(21, 2)).probabilities,
                        {0.1875, 0.125, 0.0625, 0.125, 0.1875, 0.125, 0.0625, 0.125}, 1e-12);
}

TEST(Staged, EquivalentToMonolithic) {
    for (const auto& [n, a] : kEquivalencePairs) {
        const auto staged = run_staged_exact(config(n, a)).probabilities;
        expect_vectors_near(staged, run_monolithic(config(n, a)), 1e-10);
        EXPECT_NEAR(std::accumulate(staged.begin(), staged.end(), 0.0), 1.0, 1e-10);
    }
}

TEST(Staged, EquivalentAcrossPrecisionAndWidth) {
    for (std::size_t np = 1; np <= 6; ++np)
        for (const auto& [n, a] : {Pair{21, 2}, Pair{35, 4}, Pair{33, 5}, Pair{39, 7}})
            expect_vectors_near(run_staged_exact(config(n, a, np)).probabilities, run_monolithic(config(n, a, np)), 1e-10);
    ShorConfig wide = config(15, 7);
    wide.n_q = 6;
    expect_vectors_near(run_staged_exact(wide).probabilities, run_monolithic(config(15, 7)), 1e-10);
}

TEST(Staged, PeaksWhereSrOverQIsNearestInteger) {
    for (const auto& [n, a] : kEquivalencePairs) {
        const std::size_t q = 8;
        const double r = double(classical_order(a, n));
        const auto p = run_staged_exact(config(n, a)).probabilities;
        const double pmax = *std::max_element(p.begin(), p.end());
        double best_dist = 1.0;
        for (std::size_t s = 0; s < q; ++s) {
            const double v = double(s) * r / double(q);
            best_dist = std::min(best_dist, std::abs(v - std::round(v)));
        }
        std::set<std::size_t> argmax, nearest;
        for (std::size_t s = 0; s < q; ++s) {
            if (p[s] > pmax - 1e-12) argmax.insert(s);
            const double v = double(s) * r / double(q);
            if (std::abs(v - std::round(v)) < best_dist + 1e-12) nearest.insert(s);
        }
        EXPECT_EQ(argmax, nearest) << n << "," << a;
    }
}

TEST(Staged, BranchCountsAndPrepSteps) {
    for (std::size_t np = 1; np <= 5; ++np) {
        const auto res = run_staged_exact(config(21, 2, np));
        ASSERT_EQ(res.stages.size(), np);
        for (std::size_t k = 0; k < np; ++k) {
            EXPECT_EQ(res.states_entering(k), std::size_t{1} << k);
            for (const auto& b : res.stages[k]) EXPECT_EQ(b.prior_bits.size(), k);
        }
        EXPECT_EQ(res.total_prep_steps(), np * (np + 1) / 2);
        EXPECT_EQ(res.stages[0][0].theta, 0.0);
    }
}

TEST(Staged, SecondStageStateIsSymmetrizedSuperposition) {
    // After stage 0 of (21, 2) the register is (|1> +- |16>) / sqrt 2, the sign
    // set by b_0; 2^4 mod 21 = 16.
    const auto res = run_staged_exact(config(21, 2));
    const double r = 1.0 / std::sqrt(2.0);
    for (int b : {0, 1}) {
        const std::vector<int> prior{b};
        const StateVector& psi = res.conditional_state(1, prior);
        ASSERT_EQ(psi.n_qubits(), 5u);
        const Complex phase = std::abs(psi[1]) > 0 ? psi[1] / std::abs(psi[1]) : Complex{1.0};
        for (std::size_t x = 0; x < psi.dim(); ++x) {
            const double expect = x == 1 ? r : x == 16 ? (b ? -r : r) : 0.0;
            EXPECT_NEAR(std::abs(psi[x] / phase - expect), 0.0, 1e-12) << "b0=" << b << " x=" << x;
        }
    }
}

TEST(Staged, UnreachableBranchReusesSibling) {
    // (15, 11): bit 0 is always 0, so the b_0 = 1 branch has zero weight.
    const auto res = run_staged_exact(config(15, 11));
    EXPECT_NEAR(res.stages[1][1].probability, 0.0, 1e-15);
    const StateVector& a = res.stages[1][0].register_state;
    const StateVector& b = res.stages[1][1].register_state;
    for (std::size_t i = 0; i < a.dim(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Sampled, FifteenTwoNeverOdd) {
    ShorConfig cfg = config(15, 2);
    cfg.shots = 10000;
    cfg.seed = 1;
    const auto run = run_staged_sampled(cfg, 4);
    EXPECT_EQ(run.histogram.shots, 10000u);
    for (std::size_t s = 1; s < 8; s += 2) EXPECT_EQ(run.histogram.counts[s], 0u);
}

TEST(Sampled, TwentyOneChiSquare) {
    ShorConfig cfg = config(21, 2);
    cfg.shots = 10000;
    cfg.seed = 2;
    const auto run = run_staged_sampled(cfg, 4);
    EXPECT_GT(oracle::chi_square_p_value(run.histogram.counts, run_staged_exact(cfg).probabilities), 1e-3);
}

TEST(Sampled, ZeroShotsRejected) {
    ShorConfig cfg = config(15, 2);
    cfg.shots = 0;
    EXPECT_THROW(run_staged_sampled(cfg), std::invalid_argument);
}

TEST(Sampled, IndependentOfThreadCount) {
    ShorConfig cfg = config(35, 4);
    cfg.shots = 777;
    cfg.seed = 5;
    cfg.noise = NoiseModel::calibrated();
    const auto one = run_staged_sampled(cfg, 1);
    for (unsigned t : {2u, 3u, 8u}) {
        const auto many = run_staged_sampled(cfg, t);
        EXPECT_EQ(one.histogram, many.histogram);
        EXPECT_EQ(one.shots, many.shots);
    }
    for (std::size_t i = 0; i < one.shots.size(); ++i) {
        EXPECT_EQ(one.shots[i].shot, i);
        EXPECT_EQ(one.shots[i].s, bits_to_index(one.shots[i].bits));
    }
}

TEST(Factors, Examples) {
    const FactorResult f15 = extract_factors(2, 4, 15);
    ASSERT_TRUE(f15.ok());
    EXPECT_EQ(f15.p, 3u);
    EXPECT_EQ(f15.q, 5u);
    const FactorResult f35 = extract_factors(4, 6, 35);
    ASSERT_TRUE(f35.ok());
    EXPECT_EQ(f35.p, 5u);
    EXPECT_EQ(f35.q, 7u);
    EXPECT_EQ(extract_factors(2, 3, 21).outcome, FactorResult::Outcome::OddPeriod);
    EXPECT_EQ(extract_factors(7, 3, 15).outcome, FactorResult::Outcome::OddPeriod);
    EXPECT_EQ(extract_factors(2, 0, 15).outcome, FactorResult::Outcome::ZeroPeriod);
    // 14 = -1 mod 15: a^(r/2) + 1 = 0, both gcds trivial
    EXPECT_EQ(extract_factors(14, 2, 15).outcome, FactorResult::Outcome::Trivial);
}

TEST(Factors, TrueOrderProperty) {
    // For every coprime base with even order and a^(r/2) != -1 the result is a
    // nontrivial split; otherwise it is reported trivial.
    for (std::uint64_t n : {15u, 21u, 33u, 35u, 39u, 51u, 55u, 77u, 91u}) {
        for (std::uint64_t a = 2; a < n; ++a) {
            if (std::gcd(a, n) != 1) continue;
            const std::uint64_t r = oracle::order(a, n);
            const FactorResult f = extract_factors(a, r, n);
            if (r % 2 == 1) {
                EXPECT_EQ(f.outcome, FactorResult::Outcome::OddPeriod);
                continue;
            }
            std::uint64_t h = 1;
            for (std::uint64_t i = 0; i < r / 2; ++i) h = h * a % n;
            if (h == n - 1) {
                EXPECT_EQ(f.outcome, FactorResult::Outcome::Trivial);
            } else {
                ASSERT_TRUE(f.ok()) << a << " " << n;
                EXPECT_EQ(f.p * f.q, n);
                EXPECT_GT(f.p, 1u);
                EXPECT_LE(f.p, f.q);
                EXPECT_LT(f.q, n);
            }
        }
    }
}

TEST(EndToEnd, NoiselessRecoversFactors) {
    struct Case {
        std::uint64_t n, a, r, p, q;
    };
    for (const Case& c : {Case{15, 2, 4, 3, 5}, Case{15, 11, 2, 3, 5}, Case{21, 2, 6, 3, 7}, Case{35, 4, 6, 5, 7}}) {
        ShorConfig cfg = config(c.n, c.a);
        cfg.shots = 10000;
        cfg.seed = 7;
        const auto run = run_staged_sampled(cfg, 4);
        const PeriodAssignment pa = assign_period(run.histogram);
        EXPECT_EQ(pa.best.r, c.r);
        const FactorResult f = extract_factors(c.a, pa.best.r, c.n);
        ASSERT_TRUE(f.ok());
        EXPECT_EQ(f.p, c.p);
        EXPECT_EQ(f.q, c.q);
    }
}
