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

// Circuit representation, coupling-map legality checks and CNOT-direction
// legalization.

#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "shorlab/state_vector.hpp"

namespace shorlab {

enum class GateKind { H, X, Z, Phase, CNOT, CPhase, CPerm, Measure };

inline std::string_view to_string(GateKind k) {
    switch (k) {
        case GateKind::H: return "h";
        case GateKind::X: return "x";
        case GateKind::Z: return "z";
        case GateKind::Phase: return "phase";
        case GateKind::CNOT: return "cnot";
        case GateKind::CPhase: return "cphase";
        case GateKind::CPerm: return "cperm";
        case GateKind::Measure: return "measure";
    }
    return "?";
}

inline GateKind gate_kind_from_string(std::string_view s) {
    for (GateKind k : {GateKind::H, GateKind::X, GateKind::Z, GateKind::Phase, GateKind::CNOT, GateKind::CPhase,
                       GateKind::CPerm, GateKind::Measure}) {
        if (to_string(k) == s) return k;
    }
    throw std::invalid_argument("unknown gate kind '" + std::string(s) + "'");
}

/// One circuit element.
///
/// qubits layout by kind:
///   H, X, Z, Phase, Measure: {target}
///   CNOT, CPhase:            {control, target}
///   CPerm:                   {control, r_0, ..., r_{k-1}}  (r_0 is the register LSB)
struct GateOp {
    GateKind kind = GateKind::H;
    std::vector<std::size_t> qubits;
    double theta = 0.0;        // Phase, CPhase
    std::size_t perm_id = 0;   // CPerm: index into Circuit::permutations
    std::size_t clbit = 0;     // Measure

    static GateOp h(std::size_t q) { return {GateKind::H, {q}}; }
    static GateOp x(std::size_t q) { return {GateKind::X, {q}}; }
    static GateOp z(std::size_t q) { return {GateKind::Z, {q}}; }
    static GateOp phase(std::size_t q, double theta) { return {GateKind::Phase, {q}, theta}; }
    static GateOp cnot(std::size_t c, std::size_t t) { return {GateKind::CNOT, {c, t}}; }
    static GateOp cphase(std::size_t c, std::size_t t, double theta) { return {GateKind::CPhase, {c, t}, theta}; }
    static GateOp cperm(std::size_t control, std::vector<std::size_t> reg, std::size_t perm_id) {
        GateOp op{GateKind::CPerm, {control}, 0.0, perm_id};
        op.qubits.insert(op.qubits.end(), reg.begin(), reg.end());
        return op;
    }
    static GateOp measure(std::size_t q, std::size_t clbit) { return {GateKind::Measure, {q}, 0.0, 0, clbit}; }

    bool is_single_qubit() const {
        return kind == GateKind::H || kind == GateKind::X || kind == GateKind::Z || kind == GateKind::Phase;
    }
    bool is_two_qubit() const { return kind == GateKind::CNOT || kind == GateKind::CPhase; }

    std::span<const std::size_t> register_qubits() const {
        return std::span<const std::size_t>(qubits).subspan(1);
    }

    friend bool operator==(const GateOp&, const GateOp&) = default;
};

class Circuit {
public:
    Circuit(std::size_t n_qubits, std::size_t n_clbits) : n_qubits_(n_qubits), n_clbits_(n_clbits) {}

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t n_clbits() const noexcept { return n_clbits_; }
    const std::vector<GateOp>& ops() const noexcept { return ops_; }
    const std::vector<Permutation>& permutations() const noexcept { return perms_; }

    std::size_t add_permutation(Permutation p) {
        perms_.push_back(std::move(p));
        return perms_.size() - 1;
    }

    /// Appends after checking arity, index ranges and classical-bit reuse.
    Circuit& add(GateOp op) {
        check(op);
        if (op.kind == GateKind::Measure) written_.insert(op.clbit);
        ops_.push_back(std::move(op));
        return *this;
    }

    Circuit& append(const Circuit& other) {
        if (other.n_qubits_ != n_qubits_ || other.n_clbits_ != n_clbits_) {
            throw std::invalid_argument("cannot append circuits of different widths");
        }
        const std::size_t offset = perms_.size();
        for (const auto& p : other.perms_) perms_.push_back(p);
        for (GateOp op : other.ops_) {
            if (op.kind == GateKind::CPerm) op.perm_id += offset;
            add(std::move(op));
        }
        return *this;
    }

    friend bool operator==(const Circuit& a, const Circuit& b) {
        return a.n_qubits_ == b.n_qubits_ && a.n_clbits_ == b.n_clbits_ && a.ops_ == b.ops_ &&
               a.perms_ == b.perms_;
    }

private:
    void check_qubit(std::size_t q) const {
        if (q >= n_qubits_) throw std::out_of_range("qubit " + std::to_string(q) + " out of range");
    }

    void check(const GateOp& op) const {
        std::size_t want = 0;
        switch (op.kind) {
            case GateKind::H:
            case GateKind::X:
            case GateKind::Z:
            case GateKind::Phase:
            case GateKind::Measure: want = 1; break;
            case GateKind::CNOT:
            case GateKind::CPhase: want = 2; break;
            case GateKind::CPerm:
                if (op.perm_id >= perms_.size()) throw std::out_of_range("unknown permutation id");
                want = 1 + perms_[op.perm_id].bits();
                break;
        }
        if (op.qubits.size() != want) {
            throw std::invalid_argument(std::string(to_string(op.kind)) + " expects " + std::to_string(want) +
                                        " qubits, got " + std::to_string(op.qubits.size()));
        }
        std::set<std::size_t> distinct;
        for (std::size_t q : op.qubits) {
            check_qubit(q);
            if (!distinct.insert(q).second) throw std::invalid_argument("repeated qubit in gate");
        }
        if (op.kind == GateKind::Measure) {
            if (op.clbit >= n_clbits_) throw std::out_of_range("classical bit out of range");
            if (written_.contains(op.clbit)) {
                throw std::invalid_argument("classical bit " + std::to_string(op.clbit) + " written twice");
            }
        }
    }

    std::size_t n_qubits_;
    std::size_t n_clbits_;
    std::vector<GateOp> ops_;
    std::vector<Permutation> perms_;
    std::set<std::size_t> written_;
};

/// Applies a unitary circuit element. Measure needs a random source and is
/// handled by the executors in noise.hpp.
inline void apply_gate(StateVector& s, const GateOp& op, std::span<const Permutation> perms = {}) {
    switch (op.kind) {
        case GateKind::H: apply_h(s, op.qubits.at(0)); return;
        case GateKind::X: apply_x(s, op.qubits.at(0)); return;
        case GateKind::Z: apply_z(s, op.qubits.at(0)); return;
        case GateKind::Phase: apply_phase(s, op.qubits.at(0), op.theta); return;
        case GateKind::CNOT: apply_cnot(s, op.qubits.at(0), op.qubits.at(1)); return;
        case GateKind::CPhase: apply_cphase(s, op.qubits.at(0), op.qubits.at(1), op.theta); return;
        case GateKind::CPerm:
            if (op.perm_id >= perms.size()) throw std::out_of_range("unknown permutation id");
            apply_permutation(s, op.register_qubits(), perms[op.perm_id], op.qubits.at(0));
            return;
        case GateKind::Measure: throw std::invalid_argument("apply_gate cannot execute a measurement");
    }
}

/// Applies every op of `c` except the measurements.
inline void apply_unitary_part(StateVector& s, const Circuit& c) {
    for (const auto& op : c.ops())
        if (op.kind != GateKind::Measure) apply_gate(s, op, c.permutations());
}

// ---------------------------------------------------------------------------
// Coupling maps

/// Directed CNOT connectivity: an edge (c, t) allows CNOT with control c and target t.
class CouplingMap {
public:
    explicit CouplingMap(std::size_t n_qubits) : n_qubits_(n_qubits) {}

    void add_edge(std::size_t control, std::size_t target) {
        if (control == target) throw std::invalid_argument("self-loop in coupling map");
        if (control >= n_qubits_ || target >= n_qubits_) throw std::out_of_range("coupling edge out of range");
        edges_.emplace(control, target);
    }

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    const std::set<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }
    bool allows(std::size_t control, std::size_t target) const { return edges_.contains({control, target}); }
    bool adjacent(std::size_t a, std::size_t b) const { return allows(a, b) || allows(b, a); }

private:
    std::size_t n_qubits_;
    std::set<std::pair<std::size_t, std::size_t>> edges_;
};

/// Parses `control target` lines; `#` starts a comment. The qubit count is
/// the largest index plus one unless `n_qubits` is given.
inline CouplingMap parse_coupling_map(std::istream& in, std::optional<std::size_t> n_qubits = std::nullopt) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::string line;
    std::size_t lineno = 0;
    std::size_t max_index = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long c = 0, t = 0;
        if (!(ls >> c)) continue;  // blank
        std::string rest;
        if (!(ls >> t) || (ls >> rest) || c < 0 || t < 0) {
            throw std::invalid_argument("coupling map line " + std::to_string(lineno) + ": expected 'control target'");
        }
        edges.emplace_back(static_cast<std::size_t>(c), static_cast<std::size_t>(t));
        max_index = std::max({max_index, edges.back().first, edges.back().second});
    }
    CouplingMap map(n_qubits.value_or(edges.empty() ? 0 : max_index + 1));
    for (auto [c, t] : edges) map.add_edge(c, t);
    return map;
}

inline CouplingMap load_coupling_map(const std::string& path, std::optional<std::size_t> n_qubits = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open coupling map '" + path + "'");
    return parse_coupling_map(in, n_qubits);
}

inline std::string to_text(const CouplingMap& map) {
    std::ostringstream out;
    out << "# control target\n";
    for (auto [c, t] : map.edges()) out << c << ' ' << t << '\n';
    return out.str();
}

struct CouplingFinding {
    enum class Kind { WrongDirection, NonAdjacent, NonNative };
    std::size_t op_index;
    Kind kind;
    std::string reason;
};

inline std::string_view to_string(CouplingFinding::Kind k) {
    switch (k) {
        case CouplingFinding::Kind::WrongDirection: return "wrong-direction";
        case CouplingFinding::Kind::NonAdjacent: return "non-adjacent";
        case CouplingFinding::Kind::NonNative: return "non-native";
    }
    return "?";
}

/// Lists every two-qubit op that the map does not allow as written. CPhase is
/// symmetric, so only adjacency matters for it. Controlled permutations are
/// not hardware gates and are reported as non-native.
inline std::vector<CouplingFinding> validate_coupling(const Circuit& c, const CouplingMap& map) {
    if (c.n_qubits() > map.n_qubits()) {
        throw std::invalid_argument("circuit uses " + std::to_string(c.n_qubits()) + " qubits but the map has " +
                                    std::to_string(map.n_qubits()));
    }
    std::vector<CouplingFinding> report;
    for (std::size_t i = 0; i < c.ops().size(); ++i) {
        const auto& op = c.ops()[i];
        if (op.kind == GateKind::CPerm) {
            report.push_back({i, CouplingFinding::Kind::NonNative, "controlled permutation is not a native gate"});
            continue;
        }
        if (!op.is_two_qubit()) continue;
        const std::size_t a = op.qubits[0], b = op.qubits[1];
        const std::string pair = "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
        if (!map.adjacent(a, b)) {
            report.push_back({i, CouplingFinding::Kind::NonAdjacent, "qubits " + pair + " are not coupled"});
        } else if (op.kind == GateKind::CNOT && !map.allows(a, b)) {
            report.push_back({i, CouplingFinding::Kind::WrongDirection, "CNOT " + pair + " runs against the edge"});
        }
    }
    return report;
}

/// Flips wrong-direction CNOTs using CNOT(c,t) = (H x H) CNOT(t,c) (H x H).
/// Throws std::invalid_argument when a pair is not coupled or a controlled
/// permutation is present; routing is not attempted.
inline Circuit reverse_cnot(const Circuit& c, const CouplingMap& map) {
    Circuit out(c.n_qubits(), c.n_clbits());
    for (const auto& p : c.permutations()) out.add_permutation(p);
    for (const auto& f : validate_coupling(c, map)) {
        if (f.kind != CouplingFinding::Kind::WrongDirection) {
            throw std::invalid_argument("op " + std::to_string(f.op_index) + ": " + f.reason);
        }
    }
    for (const auto& op : c.ops()) {
        if (op.kind == GateKind::CNOT && !map.allows(op.qubits[0], op.qubits[1])) {
            const std::size_t ctl = op.qubits[0], tgt = op.qubits[1];
            out.add(GateOp::h(ctl)).add(GateOp::h(tgt));
            out.add(GateOp::cnot(tgt, ctl));
            out.add(GateOp::h(ctl)).add(GateOp::h(tgt));
        } else if (op.kind == GateKind::CPhase && !map.allows(op.qubits[0], op.qubits[1])) {
            out.add(GateOp::cphase(op.qubits[1], op.qubits[0], op.theta));
        } else {
            out.add(op);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Census

struct GateCensus {
    std::size_t one_qubit = 0;
    std::size_t two_qubit = 0;  // CNOT, CPhase, and controlled permutations
    std::size_t measure = 0;

    std::size_t total() const noexcept { return one_qubit + two_qubit + measure; }
    friend bool operator==(const GateCensus&, const GateCensus&) = default;
};

inline GateCensus gate_census(const Circuit& c) {
    GateCensus g;
    for (const auto& op : c.ops()) {
        if (op.kind == GateKind::Measure) ++g.measure;
        else if (op.is_single_qubit()) ++g.one_qubit;
        else ++g.two_qubit;
    }
    return g;
}

/// Number of (control, register-qubit) interactions a controlled permutation
/// needs at minimum: one per register qubit whose value it can change.
inline std::size_t cperm_interactions(const Permutation& p) { return p.active_bits().size(); }

/// Two-qubit-gate budget: CNOT and CPhase count once, a controlled
/// permutation counts one interaction per register qubit it changes.
inline std::size_t entangling_cost(const Circuit& c) {
    std::size_t cost = 0;
    for (const auto& op : c.ops()) {
        if (op.is_two_qubit()) ++cost;
        else if (op.kind == GateKind::CPerm) cost += cperm_interactions(c.permutations()[op.perm_id]);
    }
    return cost;
}

// ---------------------------------------------------------------------------
// JSON export (schema 1)
//
// {
//   "schema": 1, "n_qubits": n, "n_clbits": m,
//   "permutations": [[p(0), p(1), ...], ...],
//   "ops": [{"kind": "h"|"x"|"z"|"phase"|"cnot"|"cphase"|"cperm"|"measure",
//            "qubits": [...], "theta": radians (phase/cphase),
//            "perm": id (cperm), "clbit": id (measure)}, ...]
// }

inline nlohmann::json to_json(const Circuit& c) {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& op : c.ops()) {
        nlohmann::json j{{"kind", std::string(to_string(op.kind))}, {"qubits", op.qubits}};
        if (op.kind == GateKind::Phase || op.kind == GateKind::CPhase) j["theta"] = op.theta;
        if (op.kind == GateKind::CPerm) j["perm"] = op.perm_id;
        if (op.kind == GateKind::Measure) j["clbit"] = op.clbit;
        ops.push_back(std::move(j));
    }
    nlohmann::json perms = nlohmann::json::array();
    for (const auto& p : c.permutations()) perms.push_back(p.map());
    return {{"schema", 1}, {"n_qubits", c.n_qubits()}, {"n_clbits", c.n_clbits()}, {"permutations", perms},
            {"ops", ops}};
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
    if (j.value("schema", 0) != 1) throw std::invalid_argument("unsupported circuit schema");
    Circuit c(j.at("n_qubits").get<std::size_t>(), j.at("n_clbits").get<std::size_t>());
    for (const auto& p : j.value("permutations", nlohmann::json::array()))
        c.add_permutation(Permutation(p.get<std::vector<std::uint32_t>>()));
    for (const auto& o : j.at("ops")) {
        GateOp op;
        op.kind = gate_kind_from_string(o.at("kind").get<std::string>());
        op.qubits = o.at("qubits").get<std::vector<std::size_t>>();
        op.theta = o.value("theta", 0.0);
        op.perm_id = o.value("perm", std::size_t{0});
        op.clbit = o.value("clbit", std::size_t{0});
        c.add(std::move(op));
    }
    return c;
}

}  // namespace shorlab
