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

// Batch commands behind the `shorlab` executable. Each returns the process
// exit code: 0 success, 2 bad input, 3 base shares a factor with N.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "shorlab/analysis.hpp"
#include "shorlab/records.hpp"
#include "shorlab/shor.hpp"

namespace shorlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitNonCoprime = 3;

/// Worker cap from SHORLAB_THREADS, else the hardware concurrency.
inline unsigned thread_budget() {
    if (const char* env = std::getenv("SHORLAB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct RunOptions {
    std::filesystem::path config;
    std::filesystem::path out_dir = "run";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> shots;
    std::optional<std::string> noise;  // path or "default"
    std::optional<unsigned> threads;
};

namespace detail {

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << text;
}

}  // namespace detail

inline int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    ShorConfig cfg;
    try {
        cfg = load_config(opt.config);
        if (opt.seed) cfg.seed = *opt.seed;
        if (opt.shots) cfg.shots = *opt.shots;
        if (opt.noise) cfg.noise = load_noise_model(*opt.noise);
        if (cfg.shots == 0) throw std::invalid_argument("shots must be at least 1");
        cfg.validate();
    } catch (const NonCoprimeBase& e) {
        err << "error: " << e.what() << "; trivial factor " << e.factor() << '\n';
        return kExitNonCoprime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    const auto start = std::chrono::steady_clock::now();
    const SampledRun run = run_staged_sampled(cfg, opt.threads.value_or(thread_budget()));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    try {
        std::filesystem::create_directories(opt.out_dir);
        const auto shots_path = opt.out_dir / "shots.jsonl";
        const auto summary_path = opt.out_dir / "summary.json";
        const auto manifest_path = opt.out_dir / "manifest.json";
        {
            std::ofstream f(shots_path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write '" + shots_path.string() + "'");
            write_shots(f, run.shots);
        }
        detail::write_file(summary_path, summary_json(cfg, run.histogram, wall).dump(2) + "\n");
        const nlohmann::json manifest{{"schema", kSchemaVersion},
                                      {"config", to_json(cfg)},
                                      {"timestamp", detail::utc_timestamp()},
                                      {"tool_version", kToolVersion},
                                      {"outputs",
                                       {{"shots", shots_path.filename().string()},
                                        {"summary", summary_path.filename().string()}}}};
        detail::write_file(manifest_path, manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
    out << "wrote " << run.histogram.shots << " shots to " << opt.out_dir.string() << '\n';
    return kExitOk;
}

struct AnalyzeOptions {
    std::filesystem::path record;  // run directory, shots.jsonl or summary.json
    std::optional<std::filesystem::path> out_dir;
};

/// Analysis of a finished run. Always produces an assignment; factoring is
/// attempted when the run's summary (with N and a) sits next to the shots.
inline int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    PhaseHistogram hist;
    std::optional<ShorConfig> cfg;
    fs::path dir;
    try {
        fs::path shots_path, summary_path;
        if (fs::is_directory(opt.record)) {
            dir = opt.record;
            shots_path = dir / "shots.jsonl";
            summary_path = dir / "summary.json";
        } else if (opt.record.extension() == ".json") {
            dir = opt.record.parent_path();
            summary_path = opt.record;
        } else {
            dir = opt.record.parent_path();
            shots_path = opt.record;
            summary_path = dir / "summary.json";
        }
        if (!shots_path.empty()) {
            std::ifstream in(shots_path);
            if (!in) throw FormatError("cannot open '" + shots_path.string() + "'");
            hist = histogram_from_shots(read_shots(in));
        }
        if (fs::exists(summary_path)) {
            std::ifstream in(summary_path);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw FormatError("summary is not valid JSON: " + std::string(e.what()));
            }
            try {
                cfg = config_from_json(j.at("config"));
                const PhaseHistogram recorded = histogram_from_json(j.at("histogram"));
                if (shots_path.empty()) hist = recorded;
                else if (!(recorded == hist)) throw FormatError("summary histogram disagrees with shot record");
            } catch (const nlohmann::json::exception& e) {
                throw FormatError("corrupt summary: " + std::string(e.what()));
            }
        } else if (shots_path.empty()) {
            throw FormatError("cannot open '" + summary_path.string() + "'");
        }
        if (hist.Q < 4) throw FormatError("need at least 2 phase bits to assign a period");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    const PeriodAssignment pa = assign_period(hist);
    const auto theory = theoretical_distribution(pa.best.r, hist.Q);
    const ProbabilityPlot plot = fit_probability_plot(theory.probs, hist.frequencies());
    std::optional<FactorResult> factors;
    if (cfg) factors = extract_factors(cfg->a, pa.best.r, cfg->N);

    const fs::path out_dir = opt.out_dir.value_or(dir.empty() ? fs::path(".") : dir);
    try {
        fs::create_directories(out_dir);
        detail::write_file(out_dir / "report.json", report_json(hist, pa, plot, factors).dump(2) + "\n");
        std::ostringstream pp, gs;
        write_probability_plot_csv(pp, plot);
        write_gaussians_csv(gs, pa);
        detail::write_file(out_dir / "probability_plot.csv", pp.str());
        detail::write_file(out_dir / "gaussians.csv", gs.str());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    out << "r=" << pa.best.r;
    if (factors && factors->ok()) {
        out << "; factors " << factors->p << " \xC3\x97 " << factors->q;
    } else if (factors) {
        out << "; no factors (" << to_string(factors->outcome) << ")";
    }
    out << "; epsilon=" << std::setprecision(3) << pa.epsilon << " vs r=" << pa.runner_up.r << '\n';
    return kExitOk;
}

inline int cmd_oracle(std::uint64_t n, std::uint64_t a, std::size_t n_p, std::ostream& out, std::ostream& err) {
    ShorConfig cfg;
    cfg.N = n;
    cfg.a = a;
    cfg.n_p = n_p;
    std::vector<double> dist;
    std::uint64_t r = 0;
    try {
        cfg.validate();
        r = classical_order(a, n);
        dist = run_monolithic(cfg);
    } catch (const NonCoprimeBase& e) {
        err << "error: " << e.what() << '\n';
        return kExitNonCoprime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
    out << "r=" << r << '\n';
    out << std::setprecision(12);
    for (std::size_t s = 0; s < dist.size(); ++s) out << "P(" << s << ")=" << dist[s] << '\n';
    return kExitOk;
}

}  // namespace shorlab::cli
