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

// Scenario scripts. Line-oriented text with three named sections:
//
//   # comment
//   scenario <name>
//   seed <n>
//
//   [actors]
//   eum <name>
//   smsr <name> [capacity=<n>]
//   smdp <name>
//   mno <name>
//
//   [steps]
//   <step> <args...> [=> <outcome>]
//
//   [expect]
//   <predicate...>
//
// Outcomes are OK, a status word name (CONDITIONS_NOT_SATISFIED, ...) or an
// error name (CapabilityRefused, ...). A step without "=>" expects OK.
// The full grammar is in docs/scenario-format.md.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esim/error.hpp"

namespace esim::scenario {

// Error raised while parsing, carrying the 1-based source line.
class ScenarioError : public Error {
public:
    ScenarioError(ErrorCode code, std::size_t line, const std::string& what)
        : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class ActorType : std::uint8_t { Eum, SmSr, SmDp, Mno };

std::string_view actor_type_name(ActorType type);

struct ActorDecl {
    ActorType type;
    std::string name;
    std::optional<std::size_t> capacity;  // SM-SR only
    std::size_t line = 0;
};

enum class StepKind : std::uint8_t {
    Manufacture,
    RegisterEis,
    Embed,
    Subscribe,
    DownloadProfile,
    Enable,
    Disable,
    Delete,
    SetFallback,
    UpdatePol1,
    SmsrChange,
    InjectFault,
};

std::string_view step_keyword(StepKind kind);

struct Step {
    StepKind kind;
    std::string subject;  // card name, or the fault action
    std::map<std::string, std::string> args;
    std::string expected = "OK";
    std::size_t line = 0;
    std::string text;
};

enum class ExpectKind : std::uint8_t {
    Profile,        // profile <card> <ref> key=value...
    Registry,       // registry <smsr> has|lacks <card>
    EisMatches,     // eis <card> matches-card
    ChannelLive,    // channel <card> live
    OldKeyRejected, // oldkey <card> rejected
    SmdpNoKey,      // smdp <smdp> holds-no-key
    CardKey,        // card <card> k80=initial|changed
    CardProfiles,   // card <card> profiles=<n>
    TraceContains,  // trace contains "<text>"
};

struct Expectation {
    ExpectKind kind;
    std::vector<std::string> words;  // positional operands after the keyword
    std::map<std::string, std::string> args;
    std::size_t line = 0;
    std::string text;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<ActorDecl> actors;
    std::vector<Step> steps;
    std::vector<Expectation> expectations;
    std::string source;

    const ActorDecl* actor(std::string_view name) const;
};

// Full validation: syntax, step names, and that every reference names an
// actor declared in [actors] or a card manufactured by an earlier step.
// Throws ScenarioError with code SyntaxError, UnknownStep or DanglingReference.
Scenario parse_scenario(std::string_view text);

// True for OK, status word names and error names.
bool is_outcome_name(std::string_view name);

}  // namespace esim::scenario
