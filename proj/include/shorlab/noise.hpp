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

// Trajectory-level gate noise: depolarizing channels after every gate and
// classical bit flips at readout.

#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shorlab/circuit.hpp"
#include "shorlab/random.hpp"
#include "shorlab/state_vector.hpp"

namespace shorlab {

/// Depolarizing probabilities are taken as 1 - reported fidelity.
struct NoiseModel {
    double p1 = 0.0;         // after every single-qubit gate
    double p2 = 0.0;         // after every two-qubit interaction
    double p_readout = 0.0;  // classical flip of each measured bit

    /// Device calibration: 99.8% single-qubit fidelity, 95-98% two-qubit
    /// fidelity (midpoint 3% error), 5% readout error.
    static NoiseModel calibrated() { return {0.002, 0.03, 0.05}; }
    static NoiseModel none() { return {}; }

    bool is_noiseless() const noexcept { return p1 == 0.0 && p2 == 0.0 && p_readout == 0.0; }

    void validate() const {
        for (double p : {p1, p2, p_readout})
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise probabilities must lie in [0, 1]");
    }

    friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

inline nlohmann::json to_json(const NoiseModel& m) {
    return {{"p1", m.p1}, {"p2", m.p2}, {"p_readout", m.p_readout}};
}

/// Fields missing from `j` keep their calibrated defaults.
inline NoiseModel noise_model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("noise model must be a JSON object");
    NoiseModel m = NoiseModel::calibrated();
    m.p1 = j.value("p1", m.p1);
    m.p2 = j.value("p2", m.p2);
    m.p_readout = j.value("p_readout", m.p_readout);
    m.validate();
    return m;
}

inline NoiseModel load_noise_model(const std::string& path) {
    if (path == "default") return NoiseModel::calibrated();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open noise model '" + path + "'");
    return noise_model_from_json(nlohmann::json::parse(in));
}

/// Applies the Pauli string `code` (base-4 digits I, X, Y, Z; digit i acts on qubits[i]).
inline void apply_pauli_string(StateVector& s, std::span<const std::size_t> qubits, std::uint64_t code) {
    for (std::size_t q : qubits) {
        switch (code & 3u) {
            case 1: apply_x(s, q); break;
            case 2: apply_y(s, q); break;
            case 3: apply_z(s, q); break;
            default: break;
        }
        code >>= 2;
    }
}

/// With probability p applies a uniformly chosen non-identity Pauli string on
/// `qubits`. Returns the applied string code, 0 when nothing happened. No
/// random draw is consumed when p == 0.
inline std::uint64_t apply_depolarizing(StateVector& s, std::span<const std::size_t> qubits, double p,
                                        RandomSource& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("depolarizing probability must lie in [0, 1]");
    if (p == 0.0 || !rng.bernoulli(p)) return 0;
    const std::uint64_t strings = (std::uint64_t{1} << (2 * qubits.size())) - 1;
    const std::uint64_t code = 1 + rng.below(strings);
    apply_pauli_string(s, qubits, code);
    return code;
}

inline std::uint64_t apply_depolarizing(StateVector& s, std::initializer_list<std::size_t> qubits, double p,
                                        RandomSource& rng) {
    const std::vector<std::size_t> q(qubits);
    return apply_depolarizing(s, std::span<const std::size_t>(q), p, rng);
}

inline int apply_readout_error(int bit, double p_readout, RandomSource& rng) {
    if (!(p_readout >= 0.0 && p_readout <= 1.0)) throw std::invalid_argument("readout probability must lie in [0, 1]");
    if (p_readout == 0.0) return bit;
    return rng.bernoulli(p_readout) ? 1 - bit : bit;
}

/// Runs one trajectory of `c` from `state` (modified in place). Each gate is
/// applied ideally, then followed by its depolarizing channel; a controlled
/// permutation is followed by a two-qubit channel on (control, r) for every
/// register qubit r it can change. Returns the classical record, unwritten
/// bits are 0.
inline std::vector<int> run_trajectory(const Circuit& c, StateVector& state, const NoiseModel& model,
                                       RandomSource& rng) {
    if (state.n_qubits() != c.n_qubits()) throw std::invalid_argument("state width does not match circuit");
    model.validate();
    std::vector<int> record(c.n_clbits(), 0);
    for (const auto& op : c.ops()) {
        if (op.kind == GateKind::Measure) {
            const int bit = measure(state, op.qubits[0], rng);
            record[op.clbit] = apply_readout_error(bit, model.p_readout, rng);
            continue;
        }
        apply_gate(state, op, c.permutations());
        if (op.is_single_qubit()) {
            apply_depolarizing(state, std::span<const std::size_t>(op.qubits), model.p1, rng);
        } else if (op.is_two_qubit()) {
            apply_depolarizing(state, std::span<const std::size_t>(op.qubits), model.p2, rng);
        } else if (op.kind == GateKind::CPerm && model.p2 > 0.0) {
            const auto reg = op.register_qubits();
            for (std::size_t b : c.permutations()[op.perm_id].active_bits()) {
                const std::size_t pair[2] = {op.qubits[0], reg[b]};
                apply_depolarizing(state, std::span<const std::size_t>(pair), model.p2, rng);
            }
        }
    }
    return record;
}

/// One noisy shot starting from |0...0>.
inline std::vector<int> noisy_shot(const Circuit& c, const NoiseModel& model, RandomSource& rng) {
    StateVector s(c.n_qubits());
    return run_trajectory(c, s, model, rng);
}

/// One noisy shot starting from an injected initial state.
inline std::vector<int> noisy_shot(const Circuit& c, const NoiseModel& model, RandomSource& rng,
                                   StateVector initial) {
    return run_trajectory(c, initial, model, rng);
}

}  // namespace shorlab
