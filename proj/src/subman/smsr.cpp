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

#include <memory>

#include "esim/error.hpp"
#include "esim/subman/actors.hpp"
#include "esim/tlv.hpp"

namespace esim::subman {

using apdu::ApduCommand;
using apdu::ApduResponse;
using apdu::Ins;
using apdu::StatusWord;
using crypto::ChannelRole;
using crypto::SecureChannelSession;
using network::Envelope;
using network::Layer;
using network::Network;
using nlohmann::json;

namespace {

constexpr std::uint8_t kTagAid = 0x4F;
constexpr std::uint8_t kTagStatusEntry = 0xE3;

ApduResponse failure(StatusWord sw) { return ApduResponse{{}, sw}; }

bool changes_isdps(const ApduCommand& cmd) {
    switch (static_cast<Ins>(cmd.ins)) {
        case Ins::CreateIsdp:
        case Ins::EnableProfile:
        case Ins::DisableProfile:
        case Ins::DeleteProfile:
        case Ins::SetFallback:
            return true;
        case Ins::InstallProfile:
            return cmd.p1 == 0x02;
        default:
            return false;
    }
}

bool relay_allowed(Layer layer, std::uint8_t ins) {
    const auto i = static_cast<Ins>(ins);
    if (layer == Layer::DpIsdp) return i == Ins::CreateIsdp || i == Ins::EstablishKey || i == Ins::InstallProfile;
    if (layer == Layer::MnoProfile)
        return i == Ins::UpdatePol1 || i == Ins::ReadProfileData || i == Ins::UpdateProfileData;
    return false;
}

struct StatusEntry {
    Aid aid;
    EisProfileState state;
    bool fallback;
};

std::vector<StatusEntry> parse_status(ByteView payload) {
    std::vector<StatusEntry> out;
    for (const auto& field : tlv::parse(payload)) {
        if (field.tag != kTagStatusEntry) continue;
        const auto inner = tlv::parse(field.value);
        StatusEntry entry{tlv::require(inner, kTagAid), EisProfileState::Created, false};
        if (auto state = tlv::find(inner, 0x81); state && state->size() == 1) {
            entry.state = (*state)[0] == static_cast<std::uint8_t>(policy::ProfileState::Enabled)
                              ? EisProfileState::Enabled
                              : EisProfileState::Disabled;
        }
        if (auto fallback = tlv::find(inner, 0x82); fallback && fallback->size() == 1) entry.fallback = (*fallback)[0] != 0;
        out.push_back(std::move(entry));
    }
    return out;
}

Eid eid_field(const json& body) { return Eid::from_hex(body.at("eid").get<std::string>()); }

json error_body(ErrorCode code, const std::string& detail) {
    return {{"type", "Error"}, {"error", to_string(code)}, {"detail", detail}};
}

}  // namespace

Credentials certify(const crypto::CertificateIssuer& ci, const std::string& subject, crypto::RandomSource& rng) {
    auto keys = crypto::generate_keypair(rng, crypto::Scheme::Signature);
    auto certificate = ci.issue(subject, keys.public_key);
    return Credentials{std::move(keys), std::move(certificate), ci.root()};
}

SmSr::SmSr(std::string id, const crypto::CertificateIssuer& ci, crypto::DeterministicRandom rng, SmSrConfig config)
    : id_(std::move(id)), credentials_(certify(ci, "smsr:" + id_, rng)), rng_(std::move(rng)), config_(config) {}

void SmSr::register_eis(EisRecord record) {
    const auto eid = record.eid;
    if (registry_.contains(eid) || incoming_.contains(eid) || outgoing_.contains(eid))
        throw Error(ErrorCode::DuplicateEid, "EID already registered: " + eid.hex());
    SecureChannelSession session(record.k80, ChannelRole::Initiator, network::card_address(eid.hex()));
    registry_.emplace(eid, Entry{std::move(record), std::move(session)});
}

const EisRecord& SmSr::record(const Eid& eid) const {
    auto it = registry_.find(eid);
    if (it == registry_.end()) throw Error(ErrorCode::UnknownEid, "EID not registered: " + eid.hex());
    return it->second.record;
}

EisRecord& SmSr::record(const Eid& eid) { return const_cast<EisRecord&>(std::as_const(*this).record(eid)); }

const SecureChannelSession& SmSr::session(const Eid& eid) const {
    auto it = registry_.find(eid);
    if (it == registry_.end()) throw Error(ErrorCode::UnknownEid, "EID not registered: " + eid.hex());
    return it->second.session;
}

std::vector<EisRecord> SmSr::records() const {
    std::vector<EisRecord> out;
    for (const auto& [eid, entry] : registry_) out.push_back(entry.record);
    return out;
}

EisTransfer SmSr::release(const Eid& eid) {
    auto node = registry_.extract(eid);
    if (node.empty()) throw Error(ErrorCode::UnknownEid, "EID not registered: " + eid.hex());
    const auto& entry = node.mapped();
    EisTransfer transfer{entry.record, entry.session.send_counter(), entry.session.recv_counter()};
    outgoing_.insert(std::move(node));
    return transfer;
}

void SmSr::restore(const Eid& eid, std::uint64_t send_counter, std::uint64_t recv_counter) {
    auto node = outgoing_.extract(eid);
    if (node.empty()) throw Error(ErrorCode::UnknownEid, "nothing in escrow for " + eid.hex());
    auto& entry = node.mapped();
    entry.session = SecureChannelSession::resume(entry.record.k80, ChannelRole::Initiator, entry.session.peer(),
                                                 std::max(send_counter, entry.session.send_counter()),
                                                 std::max(recv_counter, entry.session.recv_counter()));
    registry_.insert(std::move(node));
}

void SmSr::forget(const Eid& eid) { outgoing_.erase(eid); }

void SmSr::accept_incoming(const EisTransfer& transfer) {
    const auto& eid = transfer.record.eid;
    if (registry_.contains(eid) || incoming_.contains(eid))
        throw Error(ErrorCode::DuplicateEid, "EID already managed here: " + eid.hex());
    auto session = SecureChannelSession::resume(transfer.record.k80, ChannelRole::Initiator,
                                                network::card_address(eid.hex()), transfer.send_counter,
                                                transfer.recv_counter);
    incoming_.emplace(eid, Entry{transfer.record, std::move(session)});
}

void SmSr::adopt(const Eid& eid, SecureChannelSession session) {
    auto node = incoming_.extract(eid);
    if (node.empty()) throw Error(ErrorCode::UnknownEid, "no incoming EIS for " + eid.hex());
    auto& entry = node.mapped();
    entry.record.k80 = session.key();
    entry.session = std::move(session);
    registry_.insert(std::move(node));
}

std::pair<std::uint64_t, std::uint64_t> SmSr::drop_incoming(const Eid& eid) {
    auto node = incoming_.extract(eid);
    if (node.empty()) return {0, 0};
    return {node.mapped().session.send_counter(), node.mapped().session.recv_counter()};
}

void SmSr::lock(const Eid& eid) {
    if (!busy_.insert(eid).second) throw Error(ErrorCode::Busy, "a procedure is already running for " + eid.hex());
}

SecureChannelSession* SmSr::channel(const Eid& eid) {
    if (auto it = registry_.find(eid); it != registry_.end()) return &it->second.session;
    if (auto it = incoming_.find(eid); it != incoming_.end()) return &it->second.session;
    return nullptr;
}

ApduResponse SmSr::open(const Eid& eid, ByteView payload, SecureChannelSession* ch) {
    if (!ch) ch = channel(eid);
    if (!ch) return failure(StatusWord::SecurityStatusNotSatisfied);
    if (!crypto::looks_like_record(payload)) return failure(StatusWord::SecurityStatusNotSatisfied);
    try {
        return apdu::decode_response(ch->unwrap_bytes(payload, eid.bytes()));
    } catch (const Error&) {
        return failure(StatusWord::SecurityStatusNotSatisfied);
    }
}

ApduResponse SmSr::exchange(Network& net, const Eid& eid, const ApduCommand& command, const std::string& label,
                            SecureChannelSession* ch) {
    if (!ch) ch = channel(eid);
    if (!ch) throw Error(ErrorCode::UnknownEid, "no channel to " + eid.hex());
    Envelope env;
    env.src = id_;
    env.dst = network::card_address(eid.hex());
    env.layer = Layer::OtaIsdr;
    env.carried = Layer::OtaIsdr;
    env.label = label;
    env.payload = ch->wrap_bytes(apdu::encode_command(command), eid.bytes());
    const auto seq = net.send(std::move(env));
    const auto reply = net.await_reply(id_, seq);
    return open(eid, reply.payload, ch);
}

void SmSr::call(Network& net, const Eid& eid, const ApduCommand& command, const std::string& label, Layer carried,
                Continuation then) {
    auto* ch = channel(eid);
    if (!ch) throw Error(ErrorCode::UnknownEid, "no channel to " + eid.hex());
    Envelope env;
    env.src = id_;
    env.dst = network::card_address(eid.hex());
    env.layer = Layer::OtaIsdr;
    env.carried = carried;
    env.label = label;
    env.payload = ch->wrap_bytes(apdu::encode_command(command), eid.bytes());
    const auto seq = net.send(std::move(env));
    pending_.emplace(seq, Pending{eid, std::move(then)});
}

void SmSr::apply_status(const Eid& eid, ByteView status) {
    auto* entry = [&]() -> Entry* {
        if (auto it = registry_.find(eid); it != registry_.end()) return &it->second;
        if (auto it = incoming_.find(eid); it != incoming_.end()) return &it->second;
        return nullptr;
    }();
    if (!entry) return;
    std::vector<EisProfile> next;
    for (auto& item : parse_status(status)) {
        EisProfile profile{item.aid, {}, item.state, {}, item.fallback};
        if (const auto* known = entry->record.find(item.aid)) {
            profile.mno_id = known->mno_id;
            profile.pol1_mirror = known->pol1_mirror;
        }
        next.push_back(std::move(profile));
    }
    entry->record.profiles = std::move(next);
}

void SmSr::refresh_then(Network& net, const Eid& eid, const std::string& label, std::function<void(Network&)> then) {
    call(net, eid, apdu::make_command(Ins::GetStatus), label, Layer::OtaIsdr,
         [this, eid, then = std::move(then)](Network& n, const ApduResponse& response) {
             if (response.ok()) {
                 try {
                     apply_status(eid, response.data);
                 } catch (const Error& e) {
                     n.annotate(std::string("status unreadable: ") + e.what());
                 }
             }
             then(n);
         });
}

void SmSr::relay(Network& net, const Envelope& env) {
    auto respond = [&net, env](const ApduResponse& r) { net.reply(env, env.layer, apdu::encode_response(r)); };
    if (env.payload.size() < 16) return respond(failure(StatusWord::WrongData));
    const auto eid = Eid::from_bytes(ByteView(env.payload).first(16));
    if (!channel(eid)) return respond(failure(StatusWord::ReferencedDataNotFound));
    ApduCommand command;
    try {
        command = apdu::decode_command(ByteView(env.payload).subspan(16));
    } catch (const Error&) {
        return respond(failure(StatusWord::WrongData));
    }
    if (!relay_allowed(env.layer, command.ins)) {
        net.annotate("relay refused: " + std::string(apdu::ins_name(command.ins)));
        return respond(failure(StatusWord::SecurityStatusNotSatisfied));
    }
    const bool refresh = changes_isdps(command);
    call(net, eid, command, env.label, env.layer, [this, env, eid, refresh](Network& n, const ApduResponse& r) {
        auto answer = [env, r](Network& nn) { nn.reply(env, env.layer, apdu::encode_response(r)); };
        if (refresh && r.ok()) {
            refresh_then(n, eid, env.label, answer);
        } else {
            answer(n);
        }
    });
}

void SmSr::cleanup(Network& net, const Envelope& request, const Eid& eid, std::optional<Aid> aid) {
    call(net, eid, apdu::make_command(Ins::GetStatus), request.label, Layer::OtaIsdr,
         [this, request, eid, aid](Network& n, const ApduResponse& status) {
             std::vector<Aid> victims;
             if (status.ok()) {
                 for (const auto& item : parse_status(status.data)) {
                     const bool named = aid && item.aid == *aid && item.state != EisProfileState::Enabled;
                     if (named || item.state == EisProfileState::Created) victims.push_back(item.aid);
                 }
             }
             auto deleted = std::make_shared<json>(json::array());
             auto next = std::make_shared<std::function<void(Network&, std::size_t)>>();
             *next = [this, request, eid, victims, deleted, next](Network& nn, std::size_t i) {
                 if (i == victims.size()) {
                     refresh_then(nn, eid, request.label, [request, deleted](Network& last) {
                         last.reply(request, Layer::ActorPlain,
                                    network::plain({{"type", "CleanupResult"}, {"deleted", *deleted}}));
                     });
                     return;
                 }
                 Bytes data;
                 tlv::put(data, kTagAid, victims[i]);
                 call(nn, eid, apdu::make_command(Ins::DeleteProfile, 0, 0, data), request.label, Layer::OtaIsdr,
                      [victim = victims[i], deleted, next, i](Network& m, const ApduResponse& r) {
                          if (r.ok()) deleted->push_back(to_hex(victim));
                          (*next)(m, i + 1);
                      });
             };
             (*next)(n, 0);
         });
}

bool SmSr::handle_plain(Network& net, const Envelope& env) {
    const auto body = network::parse_plain(env.payload);
    const auto type = body.value("type", std::string());
    auto answer = [&](json reply) {
        net.reply(env, Layer::ActorPlain, network::plain(reply));
        return true;
    };

    if (type == "RegisterEis") {
        register_eis(EisRecord::from_json(body.at("eis")));
        return answer({{"type", "Registered"}, {"eid", body.at("eis").at("eid")}});
    }
    if (type == "GetEuiccCertificate") {
        return answer({{"type", "EuiccCertificate"},
                       {"certificate", to_hex(record(eid_field(body)).euicc_certificate.serialize())}});
    }
    if (type == "ProfileInstalled") {
        auto& eis = record(eid_field(body));
        const Aid aid = from_hex(body.at("aid").get<std::string>());
        const auto pol1 = Pol1::parse(body.at("pol1").get<std::string>());
        if (!pol1) throw Error(ErrorCode::WrongData, "bad POL1 text");
        auto* entry = eis.find(aid);
        if (!entry) {
            eis.profiles.push_back(EisProfile{aid, {}, EisProfileState::Disabled, {}, false});
            entry = &eis.profiles.back();
        }
        entry->mno_id = body.at("mno_id").get<std::string>();
        entry->pol1_mirror = *pol1;
        return answer({{"type", "Ack"}});
    }
    if (type == "SetPolicyMirror") {
        auto& eis = record(eid_field(body));
        auto* entry = eis.find(from_hex(body.at("aid").get<std::string>()));
        const auto pol1 = Pol1::parse(body.at("pol1").get<std::string>());
        if (!entry) throw Error(ErrorCode::NotFound, "no such profile in the EIS");
        if (!pol1) throw Error(ErrorCode::WrongData, "bad POL1 text");
        entry->pol1_mirror = *pol1;
        return answer({{"type", "Ack"}});
    }
    if (type == "Cleanup") {
        const auto eid = eid_field(body);
        record(eid);
        std::optional<Aid> aid;
        if (body.contains("aid")) aid = from_hex(body.at("aid").get<std::string>());
        cleanup(net, env, eid, aid);
        return true;
    }
    if (type == "ProfileCommand") {
        if (net.kind_of(env.src) != network::ActorKind::Mno)
            throw Error(ErrorCode::SecurityStatus, "profile commands are accepted from MNOs only");
        const auto eid = eid_field(body);
        record(eid);
        const auto op = body.at("op").get<std::string>();
        Bytes data;
        tlv::put(data, kTagAid, from_hex(body.at("aid").get<std::string>()));
        ApduCommand command;
        if (op == "enable") {
            command = apdu::make_command(Ins::EnableProfile, 0, 0, data);
        } else if (op == "disable") {
            command = apdu::make_command(Ins::DisableProfile, 0, 0, data);
        } else if (op == "delete") {
            command = apdu::make_command(Ins::DeleteProfile, 0, 0, data);
        } else if (op == "fallback") {
            command = apdu::make_command(Ins::SetFallback, body.value("flag", true) ? 1 : 0, 0, data);
        } else {
            throw Error(ErrorCode::WrongData, "unknown profile operation " + op);
        }
        call(net, eid, command, env.label, Layer::OtaIsdr, [this, env, eid](Network& n, const ApduResponse& r) {
            auto answer_with = [env, r](Network& nn) {
                char sw[5];
                std::snprintf(sw, sizeof sw, "%04X", static_cast<unsigned>(r.status));
                nn.reply(env, Layer::ActorPlain,
                         network::plain({{"type", "ProfileCommandResult"},
                                         {"sw", sw},
                                         {"status", apdu::status_name(r.status)}}));
            };
            if (r.ok()) {
                refresh_then(n, eid, env.label, answer_with);
            } else {
                answer_with(n);
            }
        });
        return true;
    }
    return false;
}

bool SmSr::handle(Network& net, const Envelope& env) {
    if (env.layer == Layer::OtaIsdr) {
        if (!env.reply_to) return false;
        auto it = pending_.find(*env.reply_to);
        if (it == pending_.end()) return false;
        auto pending = std::move(it->second);
        pending_.erase(it);
        auto response = open(pending.eid, env.payload, nullptr);
        if (!response.ok()) net.annotate("card answered " + std::string(apdu::status_name(response.status)));
        pending.then(net, response);
        return true;
    }
    if (env.reply_to) return false;
    if (served_.contains(env.seq)) {
        net.annotate("duplicate ignored");
        return true;
    }

    if (env.layer == Layer::DpIsdp || env.layer == Layer::MnoProfile) {
        served_.insert(env.seq);
        relay(net, env);
        return true;
    }

    try {
        if (!handle_plain(net, env)) return false;
    } catch (const Error& e) {
        net.reply(env, Layer::ActorPlain, network::plain(error_body(e.code(), e.what())));
    } catch (const nlohmann::json::exception& e) {
        net.reply(env, Layer::ActorPlain, network::plain(error_body(ErrorCode::WrongData, e.what())));
    }
    served_.insert(env.seq);
    return true;
}

void SmSr::attach(Network& net) {
    net.register_actor(id_, network::ActorKind::SmSr,
                       [this](Network& n, const Envelope& env) { return handle(n, env); });
}

}  // namespace esim::subman
