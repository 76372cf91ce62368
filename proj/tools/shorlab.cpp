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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "shorlab/cli.hpp"

int main(int argc, char** argv) {
    using namespace shorlab;

    CLI::App app{"shorlab: staged semiclassical-QFT Shor experiments and SSO period assignment"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    cli::RunOptions run;
    std::string noise;
    std::uint64_t seed = 0, shots = 0;
    auto* run_cmd = app.add_subcommand("run", "execute the staged pipeline and write shot records");
    run_cmd->add_option("--config", run.config, "JSON run configuration")->required();
    run_cmd->add_option("--out", run.out_dir, "output directory")->capture_default_str();
    auto* seed_opt = run_cmd->add_option("--seed", seed, "override the configured seed");
    auto* shots_opt = run_cmd->add_option("--shots", shots, "override the configured shot count");
    auto* noise_opt = run_cmd->add_option("--noise", noise, "noise model file, or 'default' for the calibrated model");

    cli::AnalyzeOptions analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "assign a period to a run record and write report files");
    analyze_cmd->add_option("record", analyze.record, "run directory, shots.jsonl or summary.json")->required();
    std::string analyze_out;
    auto* analyze_out_opt = analyze_cmd->add_option("--out", analyze_out, "output directory (default: next to the record)");

    std::uint64_t n = 0, a = 0;
    std::size_t n_p = 3;
    auto* oracle_cmd = app.add_subcommand("oracle", "print the classical order and the ideal phase distribution");
    oracle_cmd->add_option("N", n, "modulus")->required();
    oracle_cmd->add_option("a", a, "base")->required();
    oracle_cmd->add_option("--np", n_p, "period-register bits")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitBadInput;
    }

    if (run_cmd->parsed()) {
        if (*seed_opt) run.seed = seed;
        if (*shots_opt) run.shots = shots;
        if (*noise_opt) run.noise = noise;
        return cli::cmd_run(run, std::cout, std::cerr);
    }
    if (analyze_cmd->parsed()) {
        if (*analyze_out_opt) analyze.out_dir = analyze_out;
        return cli::cmd_analyze(analyze, std::cout, std::cerr);
    }
    return cli::cmd_oracle(n, a, n_p, std::cout, std::cerr);
}
