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

#include "esim/network/network.hpp"

#include <algorithm>
#include <array>

#include "esim/crypto/secure_channel.hpp"
#include "esim/error.hpp"

namespace esim::network {

namespace {

constexpr std::array<std::string_view, 4> kLayerNames{"ota-isdr", "dp-isdp", "mno-profile", "actor-plain"};
constexpr std::array<std::string_view, 4> kActionNames{"drop", "tamper", "duplicate", "delay"};
constexpr std::array<std::string_view, 5> kKindNames{"card", "smsr", "smdp", "mno", "eum"};

constexpr std::array<std::string_view, 5> kSecretFields{"k80", "key", "mno_sd_key", "secret", "k"};

bool is_secret_field(std::string_view name) {
    return std::find(kSecretFields.begin(), kSecretFields.end(), name) != kSecretFields.end();
}

}  // namespace

std::string_view layer_name(Layer layer) { return kLayerNames.at(static_cast<std::size_t>(layer)); }

std::optional<Layer> layer_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kLayerNames.size(); ++i)
        if (kLayerNames[i] == name) return static_cast<Layer>(i);
    return std::nullopt;
}

std::string_view actor_kind_name(ActorKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

std::string_view fault_action_name(FaultAction action) { return kActionNames.at(static_cast<std::size_t>(action)); }

std::optional<FaultAction> fault_action_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kActionNames.size(); ++i)
        if (kActionNames[i] == name) return static_cast<FaultAction>(i);
    return std::nullopt;
}

bool FaultRule::matches(const Envelope& env) const {
    if (src && *src != env.src) return false;
    if (dst && *dst != env.dst) return false;
    if (layer && *layer != env.layer) return false;
    if (seq && *seq != env.seq) return false;
    if (label && *label != env.label) return false;
    return true;
}

std::string FaultRule::describe() const {
    std::string out(fault_action_name(action));
    if (action == FaultAction::TamperOctet) out += " index=" + std::to_string(index);
    if (action == FaultAction::Delay) out += " rounds=" + std::to_string(rounds);
    if (label) out += " label=" + *label;
    if (src) out += " src=" + *src;
    if (dst) out += " dst=" + *dst;
    if (layer) out += " layer=" + std::string(layer_name(*layer));
    if (seq) out += " seq=" + std::to_string(*seq);
    if (nth != 1) out += " nth=" + std::to_string(nth);
    return out;
}

std::optional<FaultRule> FaultPlan::take(const Envelope& env) {
    for (auto& entry : rules_) {
        if (entry.fired || !entry.rule.matches(env)) continue;
        if (++entry.seen < entry.rule.nth) continue;
        entry.fired = true;
        return entry.rule;
    }
    return std::nullopt;
}

std::size_t FaultPlan::pending() const {
    return static_cast<std::size_t>(std::count_if(rules_.begin(), rules_.end(), [](const Entry& e) { return !e.fired; }));
}

nlohmann::json TraceEvent::to_json() const {
    return nlohmann::json{{"round", round}, {"event", event},  {"seq", seq},       {"src", src},
                          {"dst", dst},     {"layer", layer_name(layer)}, {"digest", digest}, {"note", note}};
}

std::string card_address(std::string_view eid_hex) { return "euicc:" + std::string(eid_hex); }

Bytes plain(const nlohmann::json& body) {
    nlohmann::json out = body;
    out["v"] = 1;
    return to_bytes(out.dump());
}

nlohmann::json parse_plain(ByteView payload) {
    auto body = nlohmann::json::parse(payload.begin(), payload.end(), nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw Error(ErrorCode::WrongData, "malformed actor message");
    auto v = body.find("v");
    if (v == body.end() || *v != 1) throw Error(ErrorCode::WrongData, "unsupported actor message version");
    return body;
}

nlohmann::json redact(const nlohmann::json& body) {
    if (body.is_object()) {
        nlohmann::json out = nlohmann::json::object();
        for (const auto& [name, value] : body.items()) {
            if (is_secret_field(name) && value.is_string()) {
                out[name] = "redacted:" + short_digest(to_bytes(value.get<std::string>()));
            } else {
                out[name] = redact(value);
            }
        }
        return out;
    }
    if (body.is_array()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& item : body) out.push_back(redact(item));
        return out;
    }
    return body;
}

void Network::register_actor(const std::string& id, ActorKind kind, Handler handler) {
    auto& actor = actors_[id];
    actor.kind = kind;
    actor.handler = std::move(handler);
}

std::optional<ActorKind> Network::kind_of(const std::string& id) const {
    auto it = actors_.find(id);
    if (it == actors_.end()) return std::nullopt;
    return it->second.kind;
}

void Network::check_layering(const Envelope& env) const {
    const auto src = actors_.at(env.src).kind;
    const auto dst = actors_.at(env.dst).kind;
    auto endpoints = [&](ActorKind a, ActorKind b) { return (src == a && dst == b) || (src == b && dst == a); };
    auto violation = [&](const std::string& why) {
        throw Error(ErrorCode::LayeringViolation, std::string(layer_name(env.layer)) + " " + env.src + " -> " +
                                                      env.dst + ": " + why);
    };

    const bool touches_card = src == ActorKind::Card || dst == ActorKind::Card;
    if (touches_card && env.layer != Layer::OtaIsdr) violation("cards are only reachable over the ISD-R channel");

    switch (env.layer) {
        case Layer::OtaIsdr:
            if (!endpoints(ActorKind::SmSr, ActorKind::Card)) violation("ISD-R channel runs between SM-SR and card");
            if (env.carried == Layer::ActorPlain) violation("nothing actor-plain travels to a card");
            if (dst == ActorKind::Card && !crypto::looks_like_record(env.payload))
                violation("card-bound payload is not a secure record");
            break;
        case Layer::DpIsdp:
            if (!endpoints(ActorKind::SmDp, ActorKind::SmSr)) violation("SM-DP traffic must go through the SM-SR");
            break;
        case Layer::MnoProfile:
            if (!endpoints(ActorKind::Mno, ActorKind::SmSr)) violation("MNO profile traffic must go through the SM-SR");
            break;
        case Layer::ActorPlain:
            break;
    }
}

void Network::record(std::string event, const Envelope& env, std::string note) {
    trace_.push_back(TraceEvent{round_, std::move(event), env.seq, env.src, env.dst, env.layer,
                                short_digest(env.payload), std::move(note)});
}

void Network::annotate(const std::string& text) {
    if (trace_.empty()) return;
    auto& note = trace_.back().note;
    if (!note.empty()) note += "; ";
    note += text;
}

void Network::enqueue(Envelope env, std::uint64_t due) {
    queue_.push_back(InFlight{due, next_order_++, std::move(env)});
}

std::uint64_t Network::send(Envelope env) {
    if (!actors_.contains(env.src)) throw Error(ErrorCode::UnknownActor, "unknown sender " + env.src);
    if (!actors_.contains(env.dst)) throw Error(ErrorCode::UnknownActor, "unknown recipient " + env.dst);
    check_layering(env);

    env.seq = next_seq_++;
    ++sends_;

    std::string note;
    if (env.label.size()) note = env.label;
    if (env.reply_to) note += (note.empty() ? "" : " ") + std::string("re=") + std::to_string(*env.reply_to);
    if (env.layer == Layer::ActorPlain) {
        std::string body;
        try {
            body = redact(parse_plain(env.payload)).dump();
        } catch (const Error&) {
            body = "<unparsable>";
        }
        note += (note.empty() ? "" : " ") + body;
    } else if (env.layer == Layer::OtaIsdr) {
        note += (note.empty() ? "" : " ") + std::string("carries=") + std::string(layer_name(env.carried));
    }
    record("send", env, note);

    const auto seq = env.seq;
    const auto fault = faults_.take(env);
    if (!fault) {
        enqueue(std::move(env), round_ + 1);
        return seq;
    }

    ++faults_fired_;
    record("fault", env, fault->describe());
    switch (fault->action) {
        case FaultAction::Drop:
            break;
        case FaultAction::TamperOctet:
            if (!env.payload.empty()) env.payload[fault->index % env.payload.size()] ^= 0x01;
            enqueue(std::move(env), round_ + 1);
            break;
        case FaultAction::Duplicate:
            enqueue(env, round_ + 1);
            enqueue(std::move(env), round_ + 1);
            break;
        case FaultAction::Delay:
            enqueue(std::move(env), round_ + 1 + fault->rounds);
            break;
    }
    return seq;
}

std::uint64_t Network::reply(const Envelope& request, Layer layer, Bytes payload, Layer carried) {
    Envelope env;
    env.reply_to = request.seq;
    env.src = request.dst;
    env.dst = request.src;
    env.layer = layer;
    env.carried = carried;
    env.label = request.label;
    env.payload = std::move(payload);
    return send(std::move(env));
}

std::size_t Network::step() {
    ++round_;
    std::vector<InFlight> due;
    auto split = std::stable_partition(queue_.begin(), queue_.end(),
                                       [&](const InFlight& f) { return f.due > round_; });
    due.assign(std::make_move_iterator(split), std::make_move_iterator(queue_.end()));
    queue_.erase(split, queue_.end());
    std::sort(due.begin(), due.end(), [](const InFlight& a, const InFlight& b) { return a.order < b.order; });

    for (auto& item : due) {
        ++deliveries_;
        auto& actor = actors_.at(item.env.dst);
        record("deliver", item.env, item.env.label);
        bool consumed = false;
        if (actor.handler) {
            try {
                consumed = actor.handler(*this, item.env);
            } catch (const Error& e) {
                annotate(std::string("rejected: ") + std::string(to_string(e.code())));
                consumed = true;
            }
        }
        if (!consumed) actors_.at(item.env.dst).mailbox.push_back(std::move(item.env));
    }
    return due.size();
}

void Network::settle(std::uint32_t max_rounds) {
    for (std::uint32_t i = 0; i < max_rounds && !idle(); ++i) step();
}

std::optional<Envelope> Network::take(const std::string& actor, const std::function<bool(const Envelope&)>& pred) {
    auto it = actors_.find(actor);
    if (it == actors_.end()) throw Error(ErrorCode::UnknownActor, "unknown actor " + actor);
    auto& box = it->second.mailbox;
    auto found = std::find_if(box.begin(), box.end(), pred);
    if (found == box.end()) return std::nullopt;
    Envelope env = std::move(*found);
    box.erase(found);
    return env;
}

Envelope Network::await(const std::string& actor, const std::function<bool(const Envelope&)>& pred,
                        std::uint32_t max_rounds, const std::string& what) {
    for (std::uint32_t i = 0;; ++i) {
        if (auto env = take(actor, pred)) return std::move(*env);
        if (i == max_rounds || idle()) break;
        step();
    }
    throw Error(ErrorCode::Timeout, actor + " timed out waiting for " + what);
}

Envelope Network::await_reply(const std::string& actor, std::uint64_t seq, std::uint32_t max_rounds) {
    return await(actor, [seq](const Envelope& e) { return e.reply_to == seq; }, max_rounds,
                 "a reply to #" + std::to_string(seq));
}

Envelope Network::await_message(const std::string& actor, std::uint64_t seq, std::uint32_t max_rounds) {
    return await(actor, [seq](const Envelope& e) { return e.seq == seq; }, max_rounds,
                 "message #" + std::to_string(seq));
}

std::string Network::trace_text() const {
    std::string out;
    for (const auto& event : trace_) {
        out += event.to_json().dump();
        out += '\n';
    }
    return out;
}

}  // namespace esim::network
