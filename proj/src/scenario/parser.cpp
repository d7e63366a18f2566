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

#include <algorithm>
#include <array>
#include <charconv>
#include <set>

#include "esim/apdu.hpp"
#include "esim/network/network.hpp"
#include "esim/policy.hpp"
#include "esim/scenario/scenario.hpp"

namespace esim::scenario {

namespace {

struct StepSpec {
    StepKind kind;
    std::string_view keyword;
    std::vector<std::string_view> required;
    std::vector<std::string_view> optional;
};

const std::vector<StepSpec>& step_specs() {
    static const std::vector<StepSpec> specs{
        {StepKind::Manufacture, "manufacture", {"by"}, {"date"}},
        {StepKind::RegisterEis, "register", {"at"}, {"by"}},
        {StepKind::Embed, "embed", {"device"}, {}},
        {StepKind::Subscribe, "subscribe", {"mno"}, {"type", "pol1"}},
        {StepKind::DownloadProfile, "download", {"mno", "smdp"}, {"smsr"}},
        {StepKind::Enable, "enable", {"profile"}, {"by"}},
        {StepKind::Disable, "disable", {"profile"}, {"by"}},
        {StepKind::Delete, "delete", {"profile"}, {"by"}},
        {StepKind::SetFallback, "fallback", {"profile"}, {"by", "flag"}},
        {StepKind::UpdatePol1, "pol1", {"mno", "rules"}, {}},
        {StepKind::SmsrChange, "smsr-change", {"mno", "to"}, {}},
        {StepKind::InjectFault, "fault", {}, {"label", "src", "dst", "layer", "seq", "nth", "index", "rounds"}},
    };
    return specs;
}

constexpr std::array<std::string_view, 4> kActorKeywords{"eum", "smsr", "smdp", "mno"};

enum class Section { Header, Actors, Steps, Expect };

std::vector<std::string> tokenize(std::string_view line, std::size_t number) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            continue;
        }
        if (c == '#') break;
        std::string token;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
            if (line[i] == '"') {
                const auto close = line.find('"', i + 1);
                if (close == std::string_view::npos)
                    throw ScenarioError(ErrorCode::SyntaxError, number, "unterminated quote");
                token.append(line.substr(i + 1, close - i - 1));
                i = close + 1;
            } else {
                token.push_back(line[i++]);
            }
        }
        out.push_back(std::move(token));
    }
    return out;
}

std::optional<std::uint64_t> number(std::string_view text) {
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty()) return std::nullopt;
    return value;
}

std::map<std::string, std::string> key_values(const std::vector<std::string>& tokens, std::size_t from,
                                              std::size_t line) {
    std::map<std::string, std::string> args;
    for (std::size_t i = from; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0)
            throw ScenarioError(ErrorCode::SyntaxError, line, "expected key=value, got '" + tokens[i] + "'");
        auto key = tokens[i].substr(0, eq);
        if (!args.emplace(key, tokens[i].substr(eq + 1)).second)
            throw ScenarioError(ErrorCode::SyntaxError, line, "repeated argument '" + key + "'");
    }
    return args;
}

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        if (t.find(' ') == std::string::npos) {
            out += t;
            continue;
        }
        const auto eq = t.find('=');
        const auto cut = eq == std::string::npos ? 0 : eq + 1;
        out += t.substr(0, cut) + '"' + t.substr(cut) + '"';
    }
    return out;
}

class Validator {
public:
    explicit Validator(const Scenario& s) : s_(s) {}

    void actor(std::size_t line, const std::string& name, ActorType type) const {
        const auto* decl = s_.actor(name);
        if (!decl)
            throw ScenarioError(ErrorCode::DanglingReference, line, "no " + std::string(actor_type_name(type)) +
                                                                        " named '" + name + "'");
        if (decl->type != type)
            throw ScenarioError(ErrorCode::DanglingReference, line,
                                "'" + name + "' is a " + std::string(actor_type_name(decl->type)) + ", not a " +
                                    std::string(actor_type_name(type)));
    }

    void card(std::size_t line, const std::string& name) const {
        if (!cards_.contains(name))
            throw ScenarioError(ErrorCode::DanglingReference, line, "no card named '" + name + "' manufactured before");
    }

    void endpoint(std::size_t line, const std::string& name) const {
        if (!s_.actor(name) && !cards_.contains(name))
            throw ScenarioError(ErrorCode::DanglingReference, line, "no actor or card named '" + name + "'");
    }

    void profile_ref(std::size_t line, const std::string& ref) const {
        if (ref != "provisioning") actor(line, ref, ActorType::Mno);
    }

    void add_card(std::size_t line, const std::string& name) {
        if (cards_.contains(name) || s_.actor(name))
            throw ScenarioError(ErrorCode::SyntaxError, line, "name '" + name + "' is already taken");
        cards_.insert(name);
    }

    void step(const Step& step) {
        const auto line = step.line;
        auto arg = [&](const char* key) -> const std::string* {
            auto it = step.args.find(key);
            return it == step.args.end() ? nullptr : &it->second;
        };
        switch (step.kind) {
            case StepKind::Manufacture:
                actor(line, *arg("by"), ActorType::Eum);
                add_card(line, step.subject);
                return;
            case StepKind::InjectFault:
                if (auto* v = arg("src")) endpoint(line, *v);
                if (auto* v = arg("dst")) endpoint(line, *v);
                return;
            default:
                break;
        }
        card(line, step.subject);
        switch (step.kind) {
            case StepKind::RegisterEis:
                actor(line, *arg("at"), ActorType::SmSr);
                if (auto* v = arg("by")) actor(line, *v, ActorType::Eum);
                break;
            case StepKind::Subscribe:
                actor(line, *arg("mno"), ActorType::Mno);
                break;
            case StepKind::DownloadProfile:
                actor(line, *arg("mno"), ActorType::Mno);
                actor(line, *arg("smdp"), ActorType::SmDp);
                if (auto* v = arg("smsr")) actor(line, *v, ActorType::SmSr);
                break;
            case StepKind::Enable:
            case StepKind::Disable:
            case StepKind::Delete:
            case StepKind::SetFallback:
                profile_ref(line, *arg("profile"));
                if (auto* v = arg("by")) {
                    actor(line, *v, ActorType::Mno);
                } else if (*arg("profile") == "provisioning") {
                    throw ScenarioError(ErrorCode::SyntaxError, line,
                                        "by=<mno> is required for the provisioning profile");
                }
                break;
            case StepKind::UpdatePol1:
            case StepKind::SmsrChange:
                actor(line, *arg("mno"), ActorType::Mno);
                if (auto* v = arg("to")) actor(line, *v, ActorType::SmSr);
                break;
            default:
                break;
        }
    }

    void expectation(const Expectation& e) const {
        const auto line = e.line;
        switch (e.kind) {
            case ExpectKind::Profile:
                card(line, e.words[0]);
                profile_ref(line, e.words[1]);
                break;
            case ExpectKind::Registry:
                actor(line, e.words[0], ActorType::SmSr);
                card(line, e.words[2]);
                break;
            case ExpectKind::SmdpNoKey:
                actor(line, e.words[0], ActorType::SmDp);
                break;
            case ExpectKind::TraceContains:
                break;
            default:
                card(line, e.words[0]);
                break;
        }
    }

private:
    const Scenario& s_;
    std::set<std::string> cards_;
};

void check_pol1(std::size_t line, const std::string& text) {
    const auto rules = policy::Pol1::parse(text);
    if (!rules) throw ScenarioError(ErrorCode::SyntaxError, line, "unknown POL1 rules '" + text + "'");
    if (!policy::is_valid(*rules))
        throw ScenarioError(ErrorCode::SyntaxError, line, "contradictory POL1 rules '" + text + "'");
}

Step parse_step(const std::vector<std::string>& raw, std::size_t line) {
    std::vector<std::string> tokens = raw;
    std::string expected = "OK";
    if (auto arrow = std::find(tokens.begin(), tokens.end(), "=>"); arrow != tokens.end()) {
        if (std::next(arrow) == tokens.end() || std::next(arrow, 2) != tokens.end())
            throw ScenarioError(ErrorCode::SyntaxError, line, "'=>' must be followed by exactly one outcome");
        expected = *std::next(arrow);
        if (!is_outcome_name(expected))
            throw ScenarioError(ErrorCode::SyntaxError, line, "unknown outcome '" + expected + "'");
        tokens.erase(arrow, tokens.end());
    }

    const auto& specs = step_specs();
    const auto spec = std::find_if(specs.begin(), specs.end(), [&](const StepSpec& s) { return s.keyword == tokens[0]; });
    if (spec == specs.end()) throw ScenarioError(ErrorCode::UnknownStep, line, "unknown step '" + tokens[0] + "'");
    if (tokens.size() < 2) throw ScenarioError(ErrorCode::SyntaxError, line, tokens[0] + " needs an operand");

    Step step{spec->kind, tokens[1], key_values(tokens, 2, line), expected, line, join(raw)};
    for (const auto key : spec->required)
        if (!step.args.contains(std::string(key)))
            throw ScenarioError(ErrorCode::SyntaxError, line, tokens[0] + " needs " + std::string(key) + "=");
    for (const auto& [key, value] : step.args) {
        const bool known = std::find(spec->required.begin(), spec->required.end(), key) != spec->required.end() ||
                           std::find(spec->optional.begin(), spec->optional.end(), key) != spec->optional.end();
        if (!known) throw ScenarioError(ErrorCode::SyntaxError, line, "unknown argument '" + key + "'");
        if (value.empty()) throw ScenarioError(ErrorCode::SyntaxError, line, "empty value for '" + key + "'");
    }

    auto arg = [&](const char* key) -> const std::string* {
        auto it = step.args.find(key);
        return it == step.args.end() ? nullptr : &it->second;
    };
    if (auto* v = arg("pol1")) check_pol1(line, *v);
    if (auto* v = arg("rules")) check_pol1(line, *v);
    if (auto* v = arg("flag"); v && *v != "on" && *v != "off")
        throw ScenarioError(ErrorCode::SyntaxError, line, "flag must be on or off");
    if (step.kind == StepKind::InjectFault) {
        if (!network::fault_action_from_name(step.subject))
            throw ScenarioError(ErrorCode::SyntaxError, line, "unknown fault action '" + step.subject + "'");
        if (auto* v = arg("layer"); v && !network::layer_from_name(*v))
            throw ScenarioError(ErrorCode::SyntaxError, line, "unknown layer '" + *v + "'");
        for (const char* key : {"seq", "nth", "index", "rounds"})
            if (auto* v = arg(key); v && !number(*v))
                throw ScenarioError(ErrorCode::SyntaxError, line, std::string(key) + " must be a number");
        if (auto* v = arg("nth"); v && *number(*v) == 0)
            throw ScenarioError(ErrorCode::SyntaxError, line, "nth counts from 1");
    }
    return step;
}

Expectation parse_expectation(const std::vector<std::string>& tokens, std::size_t line) {
    const auto& head = tokens[0];
    const auto n = tokens.size();
    auto bad = [&](const std::string& why) { return ScenarioError(ErrorCode::SyntaxError, line, why); };
    Expectation e{ExpectKind::Profile, {}, {}, line, join(tokens)};

    if (head == "profile") {
        if (n < 4) throw bad("profile <card> <ref> key=value...");
        e.kind = ExpectKind::Profile;
        e.words = {tokens[1], tokens[2]};
        e.args = key_values(tokens, 3, line);
        for (const auto& [key, value] : e.args) {
            if (key == "state" && value != "Enabled" && value != "Disabled" && value != "absent")
                throw bad("state must be Enabled, Disabled or absent");
            if (key == "isdp" && value != "Created" && value != "Personalized")
                throw bad("isdp must be Created or Personalized");
            if (key == "fallback" && value != "yes" && value != "no") throw bad("fallback must be yes or no");
            if (key == "pol1") check_pol1(line, value);
            if (key != "state" && key != "isdp" && key != "fallback" && key != "pol1")
                throw bad("unknown profile property '" + key + "'");
        }
    } else if (head == "registry") {
        if (n != 4 || (tokens[2] != "has" && tokens[2] != "lacks")) throw bad("registry <smsr> has|lacks <card>");
        e.kind = ExpectKind::Registry;
        e.words = {tokens[1], tokens[2], tokens[3]};
    } else if (head == "eis") {
        if (n != 3 || tokens[2] != "matches-card") throw bad("eis <card> matches-card");
        e.kind = ExpectKind::EisMatches;
        e.words = {tokens[1]};
    } else if (head == "channel") {
        if (n != 3 || tokens[2] != "live") throw bad("channel <card> live");
        e.kind = ExpectKind::ChannelLive;
        e.words = {tokens[1]};
    } else if (head == "oldkey") {
        if (n != 3 || tokens[2] != "rejected") throw bad("oldkey <card> rejected");
        e.kind = ExpectKind::OldKeyRejected;
        e.words = {tokens[1]};
    } else if (head == "smdp") {
        if (n != 3 || tokens[2] != "holds-no-key") throw bad("smdp <smdp> holds-no-key");
        e.kind = ExpectKind::SmdpNoKey;
        e.words = {tokens[1]};
    } else if (head == "card") {
        if (n != 3) throw bad("card <card> k80=initial|changed or card <card> profiles=<n>");
        e.words = {tokens[1]};
        e.args = key_values(tokens, 2, line);
        if (auto it = e.args.find("k80"); it != e.args.end()) {
            if (it->second != "initial" && it->second != "changed") throw bad("k80 must be initial or changed");
            e.kind = ExpectKind::CardKey;
        } else if (auto it2 = e.args.find("profiles"); it2 != e.args.end()) {
            if (!number(it2->second)) throw bad("profiles must be a number");
            e.kind = ExpectKind::CardProfiles;
        } else {
            throw bad("unknown card property");
        }
    } else if (head == "trace") {
        if (n != 3 || tokens[1] != "contains" || tokens[2].empty()) throw bad("trace contains \"<text>\"");
        e.kind = ExpectKind::TraceContains;
        e.words = {tokens[2]};
    } else {
        throw bad("unknown expectation '" + head + "'");
    }
    return e;
}

}  // namespace

std::string_view actor_type_name(ActorType type) { return kActorKeywords.at(static_cast<std::size_t>(type)); }

std::string_view step_keyword(StepKind kind) {
    for (const auto& spec : step_specs())
        if (spec.kind == kind) return spec.keyword;
    return "?";
}

const ActorDecl* Scenario::actor(std::string_view name) const {
    for (const auto& a : actors)
        if (a.name == name) return &a;
    return nullptr;
}

bool is_outcome_name(std::string_view name) {
    return name == "OK" || apdu::status_from_name(name).has_value() || error_code_from_name(name).has_value();
}

Scenario parse_scenario(std::string_view text) {
    Scenario s;
    s.source = std::string(text);
    Section section = Section::Header;
    std::set<Section> seen;
    bool named = false;

    std::size_t line = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto raw = text.substr(start, end - start);
        start = end + 1;
        ++line;

        const auto tokens = tokenize(raw, line);
        if (tokens.empty()) continue;
        const auto& head = tokens[0];

        if (head.front() == '[') {
            Section next;
            if (head == "[actors]") next = Section::Actors;
            else if (head == "[steps]") next = Section::Steps;
            else if (head == "[expect]") next = Section::Expect;
            else throw ScenarioError(ErrorCode::SyntaxError, line, "unknown section " + head);
            if (tokens.size() != 1) throw ScenarioError(ErrorCode::SyntaxError, line, "text after section header");
            if (!seen.insert(next).second) throw ScenarioError(ErrorCode::SyntaxError, line, "repeated section " + head);
            section = next;
            continue;
        }

        switch (section) {
            case Section::Header:
                if (head == "scenario" && tokens.size() == 2 && !named) {
                    s.name = tokens[1];
                    named = true;
                } else if (head == "seed" && tokens.size() == 2 && number(tokens[1])) {
                    s.seed = *number(tokens[1]);
                } else {
                    throw ScenarioError(ErrorCode::SyntaxError, line,
                                        "expected 'scenario <name>', 'seed <n>' or a section header");
                }
                break;
            case Section::Actors: {
                const auto kw = std::find(kActorKeywords.begin(), kActorKeywords.end(), head);
                if (kw == kActorKeywords.end())
                    throw ScenarioError(ErrorCode::SyntaxError, line, "unknown actor type '" + head + "'");
                if (tokens.size() < 2) throw ScenarioError(ErrorCode::SyntaxError, line, "actor needs a name");
                ActorDecl decl{static_cast<ActorType>(kw - kActorKeywords.begin()), tokens[1], std::nullopt, line};
                if (s.actor(decl.name))
                    throw ScenarioError(ErrorCode::SyntaxError, line, "actor '" + decl.name + "' declared twice");
                if (decl.name == "provisioning" || decl.name.find(':') != std::string::npos)
                    throw ScenarioError(ErrorCode::SyntaxError, line, "reserved actor name '" + decl.name + "'");
                const auto args = key_values(tokens, 2, line);
                for (const auto& [key, value] : args) {
                    if (key != "capacity" || decl.type != ActorType::SmSr)
                        throw ScenarioError(ErrorCode::SyntaxError, line, "unknown argument '" + key + "'");
                    const auto cap = number(value);
                    if (!cap) throw ScenarioError(ErrorCode::SyntaxError, line, "capacity must be a number");
                    decl.capacity = *cap;
                }
                s.actors.push_back(std::move(decl));
                break;
            }
            case Section::Steps:
                s.steps.push_back(parse_step(tokens, line));
                break;
            case Section::Expect:
                s.expectations.push_back(parse_expectation(tokens, line));
                break;
        }
    }
    if (!named) throw ScenarioError(ErrorCode::SyntaxError, 1, "missing 'scenario <name>'");

    Validator v(s);
    for (const auto& step : s.steps) v.step(step);
    for (const auto& e : s.expectations) v.expectation(e);
    return s;
}

}  // namespace esim::scenario
