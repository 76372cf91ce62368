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

// File formats. Every JSON document carries "schema": 1 and every CSV starts
// with a "# schema: 1" line.
//
//   config.json     {"N", "a", "n_p", "n_q"?, "shots", "seed", "noise"?}
//                   noise: "default", a path to a noise file, or an inline
//                   {"p1", "p2", "p_readout"} object
//   shots.jsonl     one {"shot": i, "bits": [b0, b1, ...], "s": s} per line
//   summary.json    {"schema", "config", "histogram": {"Q", "counts", "shots"}, "wall_time_s"}
//   report.json     {"schema", "Q", "shots", "table": [{"r", "sso", "delta_sso"}],
//                    "assignment": {"r_best", "sso_best", "r_runner_up", "sso_runner_up", "epsilon"},
//                    "equivalence_classes", "probability_plot", "factors"}
//   probability_plot.csv   s,expected,measured
//   gaussians.csv          x,pdf_r2,pdf_r3,...

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shorlab/analysis.hpp"
#include "shorlab/noise.hpp"
#include "shorlab/shor.hpp"

namespace shorlab {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed input file.
class FormatError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline nlohmann::json to_json(const ShorConfig& c) {
    nlohmann::json j{{"N", c.N}, {"a", c.a}, {"n_p", c.n_p}, {"n_q", c.register_qubits()},
                     {"shots", c.shots}, {"seed", c.seed}};
    j["noise"] = c.noise ? to_json(*c.noise) : nlohmann::json(nullptr);
    return j;
}

/// Parses a run configuration. Relative noise paths resolve against `base_dir`.
/// Throws FormatError on malformed input; semantic checks are left to
/// ShorConfig::validate().
inline ShorConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    try {
        if (!j.is_object()) throw FormatError("config must be a JSON object");
        ShorConfig c;
        c.N = j.at("N").get<std::uint64_t>();
        c.a = j.at("a").get<std::uint64_t>();
        c.n_p = j.value("n_p", std::size_t{3});
        c.n_q = j.value("n_q", std::size_t{0});
        c.shots = j.value("shots", std::uint64_t{1000});
        c.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("noise") && !j["noise"].is_null()) {
            const auto& n = j["noise"];
            if (n.is_string()) {
                std::filesystem::path p = n.get<std::string>();
                c.noise = load_noise_model(p == "default" || p.is_absolute() ? p.string() : (base_dir / p).string());
            } else {
                c.noise = noise_model_from_json(n);
            }
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid config: ") + e.what());
    }
}

inline ShorConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

inline nlohmann::json to_json(const ShotRecord& r) { return {{"shot", r.shot}, {"bits", r.bits}, {"s", r.s}}; }

inline void write_shots(std::ostream& out, const std::vector<ShotRecord>& shots) {
    for (const auto& r : shots) out << to_json(r).dump() << '\n';
}

/// Reads a shots.jsonl stream. All lines must report the same number of bits.
inline std::vector<ShotRecord> read_shots(std::istream& in) {
    std::vector<ShotRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            ShotRecord r;
            r.shot = j.at("shot").get<std::uint64_t>();
            r.bits = j.at("bits").get<std::vector<int>>();
            r.s = j.at("s").get<std::uint32_t>();
            for (int b : r.bits)
                if (b != 0 && b != 1) throw FormatError("bit values must be 0 or 1");
            if (r.bits.empty() || r.bits.size() > kMaxPeriodBits) throw FormatError("bad bit count");
            if (bits_to_index(r.bits) != r.s) throw FormatError("s does not match bits");
            if (!out.empty() && out.front().bits.size() != r.bits.size()) throw FormatError("inconsistent bit count");
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw FormatError("shots line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.empty()) throw FormatError("shot record is empty");
    return out;
}

inline PhaseHistogram histogram_from_shots(const std::vector<ShotRecord>& shots) {
    PhaseHistogram h(std::size_t{1} << shots.at(0).bits.size());
    for (const auto& r : shots) h.add(r.s);
    return h;
}

inline nlohmann::json to_json(const PhaseHistogram& h) {
    return {{"Q", h.Q}, {"counts", h.counts}, {"shots", h.shots}};
}

inline PhaseHistogram histogram_from_json(const nlohmann::json& j) {
    PhaseHistogram h = PhaseHistogram::from_counts(j.at("counts").get<std::vector<std::uint64_t>>());
    if (h.Q != j.at("Q").get<std::size_t>() || h.shots != j.at("shots").get<std::uint64_t>()) {
        throw FormatError("histogram is inconsistent");
    }
    return h;
}

inline nlohmann::json summary_json(const ShorConfig& cfg, const PhaseHistogram& h, double wall_time_s) {
    return {{"schema", kSchemaVersion}, {"config", to_json(cfg)}, {"histogram", to_json(h)}, {"wall_time_s", wall_time_s}};
}

inline nlohmann::json to_json(const FactorResult& f) {
    nlohmann::json j{{"outcome", std::string(to_string(f.outcome))}, {"r", f.r}};
    if (f.ok()) {
        j["p"] = f.p;
        j["q"] = f.q;
    }
    return j;
}

inline nlohmann::json to_json(const LineFit& f) {
    const auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"slope_err", num(f.slope_err)},
            {"intercept_err", num(f.intercept_err)}, {"covariance", num(f.covariance)},
            {"residual_ss", num(f.residual_ss)}, {"degenerate", f.degenerate}};
}

inline nlohmann::json report_json(const PhaseHistogram& h, const PeriodAssignment& pa, const ProbabilityPlot& plot,
                                  const std::optional<FactorResult>& factors) {
    nlohmann::json table = nlohmann::json::array();
    for (const auto& rec : pa.table) table.push_back({{"r", rec.r}, {"sso", rec.sso}, {"delta_sso", rec.delta_sso}});
    nlohmann::json j{{"schema", kSchemaVersion},
                     {"Q", h.Q},
                     {"shots", h.shots},
                     {"table", table},
                     {"assignment",
                      {{"r_best", pa.best.r},
                       {"sso_best", pa.best.sso},
                       {"r_runner_up", pa.runner_up.r},
                       {"sso_runner_up", pa.runner_up.sso},
                       {"epsilon", pa.epsilon}}},
                     {"equivalence_classes", pa.classes},
                     {"probability_plot", to_json(plot.fit)}};
    j["factors"] = factors ? to_json(*factors) : nlohmann::json(nullptr);
    return j;
}

namespace detail {
inline std::ostream& csv_precision(std::ostream& out) { return out << std::setprecision(17); }
}  // namespace detail

inline void write_probability_plot_csv(std::ostream& out, const ProbabilityPlot& plot) {
    detail::csv_precision(out) << "# schema: 1\ns,expected,measured\n";
    for (const auto& p : plot.points) out << p.s << ',' << p.expected << ',' << p.measured << '\n';
}

/// Unit-area N(sso, delta_sso) curves for every candidate period on a shared grid.
inline void write_gaussians_csv(std::ostream& out, const PeriodAssignment& pa, std::size_t samples = 1001) {
    double lo = 1.0, hi = 0.0;
    for (const auto& r : pa.table) {
        const double s = std::max(r.delta_sso, kSigmaFloor);
        lo = std::min(lo, r.sso - 5.0 * s);
        hi = std::max(hi, r.sso + 5.0 * s);
    }
    detail::csv_precision(out) << "# schema: 1\nx";
    for (const auto& r : pa.table) out << ",pdf_r" << r.r;
    out << '\n';
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
        out << x;
        for (const auto& r : pa.table) out << ',' << normal_pdf(x, r.sso, std::max(r.delta_sso, kSigmaFloor));
        out << '\n';
    }
}

}  // namespace shorlab
