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

#include "esim/scenario/runner.hpp"

#include <sstream>

#include "esim/crypto/keys.hpp"
#include "esim/crypto/random.hpp"
#include "esim/euicc/euicc.hpp"
#include "esim/network/network.hpp"
#include "esim/subman/actors.hpp"
#include "esim/subman/procedures.hpp"

namespace esim::scenario {

using nlohmann::json;

namespace {

constexpr std::string_view kDefaultProductionDate = "2026-01-01";
constexpr std::uint64_t kForgedCounter = std::uint64_t{1} << 40;

struct CardState {
    std::string eum;
    std::unique_ptr<euicc::Euicc> card;
    subman::EisRecord eis;
    euicc::Aid provisioning_aid;
    std::string initial_k80;
    std::vector<crypto::SymmetricKey> retired;
    std::string device;
};

class World {
public:
    World(const Scenario& s, std::uint64_t seed)
        : s_(s), seed_(seed), root_(seed, "scenario"), ci_rng_(root_.fork("ci")), ci_(ci_rng_) {
        for (const auto& decl : s.actors) {
            switch (decl.type) {
                case ActorType::Eum:
                    eum_rngs_.emplace(decl.name, root_.fork("eum:" + decl.name));
                    net_.register_actor(decl.name, network::ActorKind::Eum);
                    break;
                case ActorType::SmSr: {
                    subman::SmSrConfig config;
                    if (decl.capacity) config.capacity = *decl.capacity;
                    auto smsr = std::make_unique<subman::SmSr>(decl.name, ci_, root_.fork("smsr:" + decl.name), config);
                    smsr->attach(net_);
                    smsrs_.emplace(decl.name, std::move(smsr));
                    break;
                }
                case ActorType::SmDp: {
                    auto smdp = std::make_unique<subman::SmDp>(decl.name, ci_, root_.fork("smdp:" + decl.name));
                    smdp->attach(net_);
                    smdps_.emplace(decl.name, std::move(smdp));
                    break;
                }
                case ActorType::Mno: {
                    auto mno = std::make_unique<subman::Mno>(decl.name);
                    mno->attach(net_);
                    mnos_.emplace(decl.name, std::move(mno));
                    break;
                }
            }
        }
    }

    RunResult run() {
        RunResult result;
        auto& report = result.report;
        report.scenario = s_.name;
        report.seed = seed_;

        for (std::size_t i = 0; i < s_.steps.size(); ++i) {
            const auto& step = s_.steps[i];
            const auto mark = net_.trace().size();
            StepResult r{i + 1, step.line, step.text, step.expected, "OK", {}, 0, false};
            try {
                r.actual = execute(step);
            } catch (const Error& e) {
                r.actual = std::string(to_string(e.code()));
                r.detail = e.what();
            } catch (const std::exception& e) {
                r.actual = "InternalError";
                r.detail = e.what();
            }
            r.passed = r.actual == r.expected;
            r.trace_event = pointer(mark, r.actual);
            report.steps.push_back(std::move(r));
        }

        for (const auto& e : s_.expectations) {
            ExpectationResult r{e.line, e.text, false, {}};
            try {
                r.detail = check(e, r.passed);
            } catch (const Error& err) {
                r.passed = false;
                r.detail = std::string(to_string(err.code())) + ": " + err.what();
            } catch (const std::exception& err) {
                r.passed = false;
                r.detail = err.what();
            }
            report.expectations.push_back(std::move(r));
        }

        result.trace = net_.trace_text();
        for (const auto& [name, state] : cards_)
            report.digests["card:" + name] = short_digest(to_bytes(state.card->snapshot().dump()));
        for (const auto& [name, smsr] : smsrs_) {
            std::string lines;
            for (const auto& record : smsr->records()) {
                lines += record.to_json(false).dump() + "\n";
                result.registry.push_back(subman::RegistryLine{name, record});
            }
            report.digests["smsr:" + name] = short_digest(to_bytes(lines));
        }
        report.digests["trace"] = short_digest(to_bytes(result.trace));
        return result;
    }

private:
    std::size_t pointer(std::size_t mark, const std::string& outcome) const {
        const auto& trace = net_.trace();
        if (trace.size() == mark) return 0;
        if (outcome != "OK") {
            for (std::size_t i = mark; i < trace.size(); ++i)
                if (trace[i].note.find(outcome) != std::string::npos) return i + 1;
        }
        return mark + 1;
    }

    CardState& card(const std::string& name) { return cards_.at(name); }

    subman::SmSr& holder(const CardState& c) {
        for (auto& [name, smsr] : smsrs_)
            if (smsr->holds(c.card->eid())) return *smsr;
        throw Error(ErrorCode::UnknownEid, "no SM-SR manages " + c.card->eid().hex());
    }

    std::optional<euicc::Aid> resolve(const CardState& c, const std::string& ref) const {
        if (ref == "provisioning") return c.provisioning_aid;
        const auto* owned = mnos_.at(ref)->owned(c.card->eid());
        if (!owned) return std::nullopt;
        return owned->aid;
    }

    std::string address(const std::string& name) const {
        auto it = cards_.find(name);
        return it == cards_.end() ? name : network::card_address(it->second.card->eid().hex());
    }

    static const std::string* arg(const Step& step, const char* key) {
        auto it = step.args.find(key);
        return it == step.args.end() ? nullptr : &it->second;
    }

    std::string execute(const Step& step) {
        if (step.kind == StepKind::Manufacture) {
            const auto& eum = *arg(step, "by");
            euicc::ManufactureOptions options;
            options.eum_id = eum;
            options.production_date = arg(step, "date") ? *arg(step, "date") : std::string(kDefaultProductionDate);
            auto made = euicc::Euicc::manufacture(euicc::Eid::numbered(cards_.size() + 1), ci_, eum_rngs_.at(eum),
                                                  options);
            CardState state{eum,
                            std::make_unique<euicc::Euicc>(std::move(made.card)),
                            subman::eis_from_seed(made.eis),
                            made.eis.provisioning_aid,
                            made.eis.k80.fingerprint(),
                            {},
                            {}};
            subman::attach_card(net_, *state.card);
            cards_.emplace(step.subject, std::move(state));
            return "OK";
        }
        if (step.kind == StepKind::InjectFault) {
            network::FaultRule rule;
            rule.action = *network::fault_action_from_name(step.subject);
            if (auto* v = arg(step, "src")) rule.src = address(*v);
            if (auto* v = arg(step, "dst")) rule.dst = address(*v);
            if (auto* v = arg(step, "layer")) rule.layer = network::layer_from_name(*v);
            if (auto* v = arg(step, "label")) rule.label = *v;
            if (auto* v = arg(step, "seq")) rule.seq = std::stoull(*v);
            if (auto* v = arg(step, "nth")) rule.nth = static_cast<std::uint32_t>(std::stoul(*v));
            if (auto* v = arg(step, "index")) rule.index = std::stoull(*v);
            if (auto* v = arg(step, "rounds")) rule.rounds = static_cast<std::uint32_t>(std::stoul(*v));
            net_.faults().add(std::move(rule));
            return "OK";
        }

        auto& c = card(step.subject);
        const auto& eid = c.card->eid();
        switch (step.kind) {
            case StepKind::RegisterEis: {
                const auto* by = arg(step, "by");
                subman::register_eis(net_, by ? *by : c.eum, *smsrs_.at(*arg(step, "at")), c.eis);
                return "OK";
            }
            case StepKind::Embed:
                c.device = *arg(step, "device");
                return "OK";
            case StepKind::Subscribe: {
                subman::Subscription sub{arg(step, "type") ? *arg(step, "type") : std::string("default"), std::nullopt};
                if (auto* v = arg(step, "pol1")) sub.pol1 = policy::Pol1::parse(*v);
                mnos_.at(*arg(step, "mno"))->subscribe(eid, std::move(sub));
                return "OK";
            }
            case StepKind::DownloadProfile: {
                auto& mno = *mnos_.at(*arg(step, "mno"));
                const auto* sub = mno.subscription(eid);
                if (!sub) throw Error(ErrorCode::WrongState, mno.id() + " has no subscription for this card");
                auto& smsr = arg(step, "smsr") ? *smsrs_.at(*arg(step, "smsr")) : holder(c);
                subman::download_profile(net_, mno, *smdps_.at(*arg(step, "smdp")), smsr,
                                         subman::DownloadRequest{eid, sub->profile_type, mno.id(), sub->pol1});
                return "OK";
            }
            case StepKind::Enable:
            case StepKind::Disable:
            case StepKind::Delete:
            case StepKind::SetFallback: {
                const auto& ref = *arg(step, "profile");
                const auto aid = resolve(c, ref);
                if (!aid) throw Error(ErrorCode::NotFound, ref + " owns no profile on " + step.subject);
                const auto& requester = *mnos_.at(arg(step, "by") ? *arg(step, "by") : ref);
                subman::ProfileOp op = subman::ProfileOp::Enable;
                if (step.kind == StepKind::Disable) op = subman::ProfileOp::Disable;
                if (step.kind == StepKind::Delete) op = subman::ProfileOp::Delete;
                if (step.kind == StepKind::SetFallback) {
                    const auto* flag = arg(step, "flag");
                    op = flag && *flag == "off" ? subman::ProfileOp::ClearFallback : subman::ProfileOp::SetFallback;
                }
                const auto sw = subman::profile_command(net_, requester, holder(c), eid, op, *aid);
                return sw == apdu::StatusWord::Success ? "OK" : std::string(apdu::status_name(sw));
            }
            case StepKind::UpdatePol1:
                subman::mno_update_policy(net_, *mnos_.at(*arg(step, "mno")), holder(c), eid,
                                          *policy::Pol1::parse(*arg(step, "rules")));
                return "OK";
            case StepKind::SmsrChange: {
                auto& old_smsr = holder(c);
                const auto old_key = old_smsr.record(eid).k80;
                const auto before = c.card->k80_fingerprint();
                subman::smsr_change(net_, *mnos_.at(*arg(step, "mno")), old_smsr, *smsrs_.at(*arg(step, "to")), eid);
                if (c.card->k80_fingerprint() != before) c.retired.push_back(old_key);
                return "OK";
            }
            default:
                break;
        }
        throw Error(ErrorCode::UnknownStep, "unhandled step");
    }

    std::string check(const Expectation& e, bool& passed) {
        passed = false;
        switch (e.kind) {
            case ExpectKind::Profile: {
                auto& c = card(e.words[0]);
                const auto aid = resolve(c, e.words[1]);
                const euicc::IsdP* isdp = aid ? c.card->find(*aid) : nullptr;
                for (const auto& [key, want] : e.args) {
                    std::string got;
                    if (key == "state") {
                        got = isdp && isdp->profile ? std::string(euicc::profile_state_name(isdp->profile->state))
                                                    : "absent";
                    } else if (!isdp) {
                        got = "absent";
                    } else if (key == "isdp") {
                        got = std::string(euicc::isdp_state_name(isdp->state));
                    } else if (!isdp->profile) {
                        got = "no profile";
                    } else if (key == "fallback") {
                        got = isdp->profile->fallback ? "yes" : "no";
                    } else if (key == "pol1") {
                        got = isdp->profile->pol1.to_string();
                        if (*policy::Pol1::parse(want) == isdp->profile->pol1) got = want;
                    }
                    if (got != want) return key + " is " + got;
                }
                passed = true;
                return {};
            }
            case ExpectKind::Registry: {
                const bool has = smsrs_.at(e.words[0])->holds(card(e.words[2]).card->eid());
                passed = has == (e.words[1] == "has");
                return has ? "registered" : "not registered";
            }
            case ExpectKind::EisMatches: {
                auto& c = card(e.words[0]);
                passed = subman::eis_matches_card(holder(c).record(c.card->eid()), *c.card);
                return passed ? std::string() : "EIS and card disagree";
            }
            case ExpectKind::ChannelLive: {
                auto& c = card(e.words[0]);
                passed = subman::ping(net_, holder(c), c.card->eid());
                return passed ? std::string() : "no answer under the current k80";
            }
            case ExpectKind::OldKeyRejected: {
                auto& c = card(e.words[0]);
                if (c.retired.empty()) return "no retired k80 to try";
                for (const auto& key : c.retired) {
                    auto session = crypto::SecureChannelSession::resume(key, crypto::ChannelRole::Initiator,
                                                                        "retired", kForgedCounter, 0);
                    const auto reply = c.card->handle_ota(session.wrap_bytes(
                        apdu::encode_command(apdu::make_command(apdu::Ins::Ping)), c.card->eid().bytes()));
                    if (crypto::looks_like_record(reply)) return "record under a retired k80 was accepted";
                    if (apdu::decode_response(reply).status != apdu::StatusWord::SecurityStatusNotSatisfied)
                        return "unexpected status for a retired k80";
                }
                passed = true;
                return {};
            }
            case ExpectKind::SmdpNoKey:
                passed = smdps_.at(e.words[0])->holds_no_key();
                return passed ? std::string() : "installation key still held";
            case ExpectKind::CardKey: {
                auto& c = card(e.words[0]);
                const bool initial = c.card->k80_fingerprint() == c.initial_k80;
                passed = initial == (e.args.at("k80") == "initial");
                return initial ? "k80 is the initial key" : "k80 has changed";
            }
            case ExpectKind::CardProfiles: {
                const auto count = card(e.words[0]).card->isdps().size();
                passed = count == std::stoull(e.args.at("profiles"));
                return "card has " + std::to_string(count);
            }
            case ExpectKind::TraceContains:
                passed = net_.trace_text().find(e.words[0]) != std::string::npos;
                return passed ? std::string() : "not in trace";
        }
        return {};
    }

    const Scenario& s_;
    std::uint64_t seed_;
    crypto::DeterministicRandom root_;
    crypto::DeterministicRandom ci_rng_;
    crypto::CertificateIssuer ci_;
    network::Network net_;
    std::map<std::string, crypto::DeterministicRandom> eum_rngs_;
    std::map<std::string, std::unique_ptr<subman::SmSr>> smsrs_;
    std::map<std::string, std::unique_ptr<subman::SmDp>> smdps_;
    std::map<std::string, std::unique_ptr<subman::Mno>> mnos_;
    std::map<std::string, CardState> cards_;
};

}  // namespace

bool RunReport::passed() const { return failures() == 0; }

std::size_t RunReport::failures() const {
    std::size_t n = 0;
    for (const auto& s : steps) n += s.passed ? 0 : 1;
    for (const auto& e : expectations) n += e.passed ? 0 : 1;
    return n;
}

std::string RunReport::text() const {
    std::ostringstream out;
    out << "scenario " << scenario << " (seed " << seed << ")\n";
    out << "steps\n";
    for (const auto& s : steps) {
        out << (s.passed ? "  [ok]   " : "  [FAIL] ") << s.index << " (line " << s.line << ") " << s.text;
        if (s.passed) {
            out << " -> " << s.actual << "\n";
            continue;
        }
        out << " -> expected " << s.expected << ", got " << s.actual;
        if (s.trace_event) out << " (trace event " << s.trace_event << ")";
        if (!s.detail.empty()) out << ": " << s.detail;
        out << "\n";
    }
    out << "expectations\n";
    for (const auto& e : expectations) {
        out << (e.passed ? "  [ok]   " : "  [FAIL] ") << "(line " << e.line << ") " << e.text;
        if (!e.passed && !e.detail.empty()) out << ": " << e.detail;
        out << "\n";
    }
    out << "digests\n";
    for (const auto& [name, digest] : digests) out << "  " << name << " " << digest << "\n";
    if (!trace_path.empty()) out << "trace " << trace_path << "\n";
    out << (passed() ? "PASS" : "FAIL") << " " << (checks() - failures()) << "/" << checks() << "\n";
    return out.str();
}

json RunReport::to_json() const {
    json j{{"scenario", scenario}, {"seed", seed}, {"passed", passed()}, {"digests", digests}};
    j["steps"] = json::array();
    for (const auto& s : steps) {
        j["steps"].push_back({{"index", s.index},
                              {"line", s.line},
                              {"step", s.text},
                              {"expected", s.expected},
                              {"actual", s.actual},
                              {"detail", s.detail},
                              {"trace_event", s.trace_event},
                              {"passed", s.passed}});
    }
    j["expectations"] = json::array();
    for (const auto& e : expectations)
        j["expectations"].push_back({{"line", e.line}, {"expect", e.text}, {"passed", e.passed}, {"detail", e.detail}});
    if (!trace_path.empty()) j["trace"] = trace_path;
    return j;
}

RunResult run(const Scenario& scenario, std::optional<std::uint64_t> seed_override) {
    World world(scenario, seed_override.value_or(scenario.seed));
    return world.run();
}

std::string trace_file(const Scenario& scenario, std::uint64_t seed, const std::string& trace) {
    json header{{"esim_trace", 1}, {"scenario", scenario.name}, {"seed", seed}, {"source", scenario.source}};
    return header.dump() + "\n" + trace;
}

ReplayResult replay(std::string_view text) {
    const auto newline = text.find('\n');
    if (newline == std::string_view::npos) throw Error(ErrorCode::WrongData, "trace file has no header");
    const auto header = json::parse(text.substr(0, newline), nullptr, false);
    if (header.is_discarded() || !header.is_object() || header.value("esim_trace", 0) != 1 ||
        !header.contains("source") || !header.contains("seed"))
        throw Error(ErrorCode::WrongData, "unrecognized trace header");

    const auto scenario = parse_scenario(header.at("source").get<std::string>());
    ReplayResult result{false, 0, run(scenario, header.at("seed").get<std::uint64_t>())};
    const auto recorded = text.substr(newline + 1);
    result.identical = recorded == result.rerun.trace;
    if (!result.identical) {
        std::istringstream a{std::string(recorded)};
        std::istringstream b{result.rerun.trace};
        std::string la;
        std::string lb;
        for (std::size_t n = 1;; ++n) {
            const bool ga = static_cast<bool>(std::getline(a, la));
            const bool gb = static_cast<bool>(std::getline(b, lb));
            if (ga != gb || la != lb) {
                result.first_difference = n;
                break;
            }
            if (!ga) break;
        }
    }
    return result;
}

}  // namespace esim::scenario
