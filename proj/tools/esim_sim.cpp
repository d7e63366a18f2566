/*
 * Copyright 2026 The esim-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// esim-sim: runs scenario scripts against the simulated eUICC ecosystem.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "esim/error.hpp"
#include "esim/scenario/runner.hpp"
#include "esim/scenario/scenario.hpp"
#include "esim/subman/eis.hpp"

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitInvalid = 2;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed, const std::string& trace_path,
            const std::string& registry_path, bool json) {
    const auto scenario = esim::scenario::parse_scenario(slurp(file));
    auto result = esim::scenario::run(scenario, seed);
    const auto used_seed = seed.value_or(scenario.seed);
    if (!trace_path.empty()) {
        spill(trace_path, esim::scenario::trace_file(scenario, used_seed, result.trace));
        result.report.trace_path = trace_path;
    }
    if (!registry_path.empty()) {
        std::ofstream out(registry_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + registry_path);
        esim::subman::save_registry(out, result.registry);
    }
    if (json) {
        std::cout << result.report.to_json().dump(2) << "\n";
    } else {
        std::cout << result.report.text();
    }
    return result.report.passed() ? 0 : kExitFailed;
}

int cmd_validate(const std::string& file) {
    const auto s = esim::scenario::parse_scenario(slurp(file));
    std::cout << s.name << ": " << s.actors.size() << " actors, " << s.steps.size() << " steps, "
              << s.expectations.size() << " expectations\n";
    return 0;
}

int cmd_replay(const std::string& file) {
    const auto r = esim::scenario::replay(slurp(file));
    if (r.identical) {
        std::cout << "identical (" << r.rerun.report.scenario << ", seed " << r.rerun.report.seed << ")\n";
        return 0;
    }
    std::cout << "trace differs at event " << r.first_difference << "\n";
    return kExitFailed;
}

int cmd_registry(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file);
    for (const auto& line : esim::subman::load_registry(in)) {
        std::cout << line.smsr << " " << line.eis.eid.hex() << " eum=" << line.eis.eum_id
                  << " profiles=" << line.eis.profiles.size() << " k80=" << line.eis.k80.fingerprint() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eUICC remote provisioning simulator"};
    app.require_subcommand(1);

    std::string file;
    std::optional<std::uint64_t> seed;
    std::string trace_path;
    std::string registry_path;
    bool json = false;

    auto* run = app.add_subcommand("run", "Run a scenario and report every check");
    run->add_option("file", file, "Scenario script")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--trace", trace_path, "Write the replayable trace here");
    run->add_option("--registry", registry_path, "Write the final SM-SR registries here (JSON lines)");
    run->add_flag("--json-report", json, "Print the report as JSON");

    auto* validate = app.add_subcommand("validate", "Parse and check a scenario without running it");
    validate->add_option("file", file, "Scenario script")->required();

    auto* replay = app.add_subcommand("replay", "Re-run a trace file and compare");
    replay->add_option("trace", file, "Trace file from run --trace")->required();

    auto* registry = app.add_subcommand("registry", "Load and list a registry file");
    registry->add_option("file", file, "Registry file from run --registry")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(file, seed, trace_path, registry_path, json);
        if (*validate) return cmd_validate(file);
        if (*replay) return cmd_replay(file);
        if (*registry) return cmd_registry(file);
    } catch (const esim::Error& e) {
        std::cerr << "esim-sim: " << esim::to_string(e.code()) << ": " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "esim-sim: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}
