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

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "esim/scenario/scenario.hpp"
#include "esim/subman/eis.hpp"
#include "json.hpp"

namespace esim::scenario {

struct StepResult {
    std::size_t index = 0;  // 1-based
    std::size_t line = 0;
    std::string text;
    std::string expected;
    std::string actual;
    std::string detail;     // error message, if any
    std::size_t trace_event = 0;  // 1-based pointer into the trace
    bool passed = false;
};

struct ExpectationResult {
    std::size_t line = 0;
    std::string text;
    bool passed = false;
    std::string detail;
};

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<StepResult> steps;
    std::vector<ExpectationResult> expectations;
    std::map<std::string, std::string> digests;  // card:<name>, smsr:<name>, trace
    std::string trace_path;

    // Step outcomes count as expectations: every one must hold.
    bool passed() const;
    std::size_t checks() const { return steps.size() + expectations.size(); }
    std::size_t failures() const;

    std::string text() const;
    nlohmann::json to_json() const;
};

struct RunResult {
    RunReport report;
    std::string trace;  // JSON lines, no header
    std::vector<subman::RegistryLine> registry;
};

// Runs every step and evaluates every expectation. Actor failures become
// failed checks; nothing thrown by an actor escapes.
RunResult run(const Scenario& scenario, std::optional<std::uint64_t> seed_override = std::nullopt);

// Trace file: a header line describing the run, then the trace.
std::string trace_file(const Scenario& scenario, std::uint64_t seed, const std::string& trace);

struct ReplayResult {
    bool identical = false;
    std::size_t first_difference = 0;  // 1-based trace event, 0 when identical
    RunResult rerun;
};

// Re-runs the scenario recorded in a trace file header and compares the
// resulting trace octet for octet. Throws Error(WrongData) for a malformed file.
ReplayResult replay(std::string_view trace_file_text);

}  // namespace esim::scenario
