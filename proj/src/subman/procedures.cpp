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

#include "esim/subman/procedures.hpp"

#include <cstdio>

#include "esim/crypto/kdf.hpp"
#include "esim/error.hpp"
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
constexpr std::uint8_t kTagCertificate = 0x21;
constexpr std::uint8_t kTagChallenge = 0x85;
constexpr std::uint8_t kTagOffer = 0x87;
constexpr std::uint8_t kTagInstallRecord = 0x70;
constexpr std::uint8_t kTagMnoRecord = 0x71;

constexpr std::uint32_t kCleanupRounds = 64;

class EidLock {
public:
    EidLock(SmSr& smsr, const Eid& eid) : smsr_(smsr), eid_(eid) { smsr_.lock(eid_); }
    ~EidLock() { smsr_.unlock(eid_); }
    EidLock(const EidLock&) = delete;
    EidLock& operator=(const EidLock&) = delete;

private:
    SmSr& smsr_;
    Eid eid_;
};

Envelope envelope(const std::string& src, const std::string& dst, Layer layer, std::string label, Bytes payload) {
    Envelope env;
    env.src = src;
    env.dst = dst;
    env.layer = layer;
    env.label = std::move(label);
    env.payload = std::move(payload);
    return env;
}

// Parses an actor reply, turning {"type": "Error"} into the error it names.
json expect_plain(const Envelope& env) {
    auto body = network::parse_plain(env.payload);
    if (body.value("type", std::string()) == "Error") {
        const auto code = error_code_from_name(body.value("error", std::string()));
        throw Error(code.value_or(ErrorCode::WrongData), body.value("detail", std::string("actor error")));
    }
    return body;
}

json ask(Network& net, const std::string& src, const std::string& dst, const std::string& label, const json& body,
         std::uint32_t rounds = Network::kDefaultTimeout) {
    const auto seq = net.send(envelope(src, dst, Layer::ActorPlain, label, network::plain(body)));
    return expect_plain(net.await_reply(src, seq, rounds));
}

// Delivers a one-way actor message and returns its body as received.
json post(Network& net, const std::string& src, const std::string& dst, const std::string& label, const json& body) {
    const auto seq = net.send(envelope(src, dst, Layer::ActorPlain, label, network::plain(body)));
    return network::parse_plain(net.await_message(dst, seq).payload);
}

std::string text(const json& body, const char* name) {
    try {
        return body.at(name).get<std::string>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::WrongData, std::string("message field missing: ") + name);
    }
}

// Command for the card framed for the SM-SR relay: eid || APDU.
ApduResponse relay_call(Network& net, const std::string& src, SmSr& smsr, Layer layer, const Eid& eid,
                        const ApduCommand& command, const std::string& label) {
    Bytes frame(eid.bytes().begin(), eid.bytes().end());
    append(frame, apdu::encode_command(command));
    const auto seq = net.send(envelope(src, smsr.id(), layer, label, std::move(frame)));
    const auto reply = net.await_reply(src, seq);
    try {
        return apdu::decode_response(reply.payload);
    } catch (const Error&) {
        return ApduResponse{{}, StatusWord::WrongData};
    }
}

Bytes with_aid(const Aid& aid) {
    Bytes data;
    tlv::put(data, kTagAid, aid);
    return data;
}

void require_ok(const ApduResponse& response, ErrorCode code, const char* what) {
    if (!response.ok())
        throw Error(code, std::string(what) + " refused: " + std::string(apdu::status_name(response.status)));
}

[[noreturn]] void abort_download(Network& net, SmDp& smdp, SmSr& smsr, const Eid& eid,
                                 const std::optional<Aid>& created, ErrorCode code, const std::string& why) {
    smdp.erase(eid);
    json body{{"type", "Cleanup"}, {"eid", eid.hex()}};
    if (created) body["aid"] = to_hex(*created);
    try {
        ask(net, smdp.id(), smsr.id(), "download:cleanup", body, kCleanupRounds);
    } catch (const Error& e) {
        net.annotate(std::string("cleanup incomplete: ") + e.what());
    }
    throw Error(code, why);
}

}  // namespace

ErrorCode error_for_status(StatusWord sw) {
    switch (sw) {
        case StatusWord::ConditionsNotSatisfied:
            return ErrorCode::NotEnabled;
        case StatusWord::SecurityStatusNotSatisfied:
            return ErrorCode::SecurityStatus;
        case StatusWord::ReferencedDataNotFound:
            return ErrorCode::NotFound;
        case StatusWord::WrongData:
            return ErrorCode::WrongData;
        default:
            return ErrorCode::WrongState;
    }
}

std::string_view profile_op_name(ProfileOp op) {
    switch (op) {
        case ProfileOp::Enable: return "enable";
        case ProfileOp::Disable: return "disable";
        case ProfileOp::Delete: return "delete";
        case ProfileOp::SetFallback:
        case ProfileOp::ClearFallback: return "fallback";
    }
    return "unknown";
}

void smsr_register(SmSr& smsr, EisRecord eis) { smsr.register_eis(std::move(eis)); }

void register_eis(Network& net, const std::string& eum, SmSr& smsr, const EisRecord& eis) {
    ask(net, eum, smsr.id(), "register", {{"type", "RegisterEis"}, {"eis", eis.to_json(true)}});
    if (!ping(net, smsr, eis.eid)) throw Error(ErrorCode::SecurityStatus, "k80 channel is not live after registration");
}

euicc::Profile smdp_build_profile(SmDp& smdp, const DownloadRequest& request) { return smdp.build_profile(request); }

Aid download_profile(Network& net, Mno& mno, SmDp& smdp, SmSr& smsr, const DownloadRequest& request) {
    const Eid eid = request.eid;
    if (!smsr.holds(eid)) throw Error(ErrorCode::UnknownEid, "EID not registered at " + smsr.id() + ": " + eid.hex());
    EidLock lock(smsr, eid);

    // 1: the order reaches the SM-DP; the SM-DP works from what it received.
    json order{{"type", "DownloadProfile"},
               {"eid", eid.hex()},
               {"profile_type", request.profile_type},
               {"mno_id", request.mno_id},
               {"smsr", smsr.id()}};
    if (request.pol1) order["pol1"] = request.pol1->to_string();
    const auto received = post(net, mno.id(), smdp.id(), "download:1", order);
    DownloadRequest accepted{Eid::from_hex(text(received, "eid")), text(received, "profile_type"),
                             text(received, "mno_id"), std::nullopt};
    if (received.contains("pol1")) {
        accepted.pol1 = Pol1::parse(text(received, "pol1"));
        if (!accepted.pol1) throw Error(ErrorCode::WrongData, "unreadable POL1 in request");
    }
    if (accepted.eid != eid) throw Error(ErrorCode::WrongData, "request names a different card");

    // 2
    const auto profile = smdp.build_profile(accepted);
    auto* installation = &smdp.begin(eid);
    std::optional<Aid> created;

    // 3
    try {
        const auto response = relay_call(net, smdp.id(), smsr, Layer::DpIsdp, eid,
                                          apdu::make_command(Ins::CreateIsdp), "download:3");
        require_ok(response, ErrorCode::IsdpCreationFailed, "ISD-P creation");
        created = tlv::require(tlv::parse(response.data), kTagAid);
    } catch (const Error& e) {
        abort_download(net, smdp, smsr, eid, created, ErrorCode::IsdpCreationFailed, e.what());
    }
    const Aid aid = *created;
    installation->aid = aid;

    // 4
    try {
        const auto reply = ask(net, smdp.id(), smsr.id(), "download:4",
                               {{"type", "GetEuiccCertificate"}, {"eid", eid.hex()}});
        const auto card_certificate = crypto::Certificate::parse(from_hex(text(reply, "certificate")));
        const auto& own = smdp.credentials();
        installation->ecka.emplace(own.keys, own.certificate, own.ci_root, card_certificate,
                                   std::string(crypto::kProfileCredentialsContext),
                                   crypto::KeyRole::ProfileCredentials);

        Bytes hello = with_aid(aid);
        tlv::put(hello, kTagCertificate, installation->ecka->hello());
        auto response = relay_call(net, smdp.id(), smsr, Layer::DpIsdp, eid,
                                   apdu::make_command(Ins::EstablishKey, 0x01, 0, hello), "download:4");
        require_ok(response, ErrorCode::KeyAgreementFailed, "certificate");
        const auto challenge = tlv::require(tlv::parse(response.data), kTagChallenge);

        Bytes offer = with_aid(aid);
        tlv::put(offer, kTagOffer, installation->ecka->on_challenge(challenge, smdp.rng()));
        response = relay_call(net, smdp.id(), smsr, Layer::DpIsdp, eid,
                              apdu::make_command(Ins::EstablishKey, 0x02, 0, offer), "download:4");
        require_ok(response, ErrorCode::KeyAgreementFailed, "key agreement offer");

        installation->channel.emplace(*installation->ecka->key(), ChannelRole::Initiator, "isdp:" + to_hex(aid));
        installation->ecka->wipe();
        installation->ecka.reset();
    } catch (const Error& e) {
        abort_download(net, smdp, smsr, eid, created, ErrorCode::KeyAgreementFailed, e.what());
    }

    // 5, 6
    try {
        Bytes open = with_aid(aid);
        tlv::put(open, kTagInstallRecord, installation->channel->wrap_bytes(aid, aid));
        auto response = relay_call(net, smdp.id(), smsr, Layer::DpIsdp, eid,
                                   apdu::make_command(Ins::InstallProfile, 0x01, 0, open), "download:5");
        require_ok(response, ErrorCode::InstallRejected, "secure channel");

        Bytes upload = with_aid(aid);
        tlv::put(upload, kTagInstallRecord, installation->channel->wrap_bytes(profile.serialize(), aid));
        response = relay_call(net, smdp.id(), smsr, Layer::DpIsdp, eid,
                              apdu::make_command(Ins::InstallProfile, 0x02, 0, upload), "download:6");
        require_ok(response, ErrorCode::InstallRejected, "profile installation");
    } catch (const Error& e) {
        abort_download(net, smdp, smsr, eid, created, ErrorCode::InstallRejected, e.what());
    }
    smdp.erase(eid);

    // 7
    try {
        ask(net, smdp.id(), smsr.id(), "download:7",
            {{"type", "ProfileInstalled"},
             {"eid", eid.hex()},
             {"aid", to_hex(aid)},
             {"mno_id", profile.mno_id},
             {"pol1", profile.pol1.to_string()}});
        const auto result = post(net, smdp.id(), mno.id(), "download:7",
                                 {{"type", "DownloadResult"},
                                  {"eid", eid.hex()},
                                  {"aid", to_hex(aid)},
                                  {"mno_sd_key", to_hex(profile.mno_sd_key.material())}});
        mno.own(eid, from_hex(text(result, "aid")),
                crypto::SymmetricKey(from_hex(text(result, "mno_sd_key")), crypto::KeyRole::MnoSd));
    } catch (const Error& e) {
        abort_download(net, smdp, smsr, eid, created, ErrorCode::InstallRejected, e.what());
    }
    return aid;
}

void mno_update_policy(Network& net, Mno& mno, SmSr& smsr, const Eid& eid, const Pol1& rules) {
    policy::validate(rules);
    auto* owned = mno.owned(eid);
    if (!owned) throw Error(ErrorCode::SecurityStatus, mno.id() + " holds no profile on " + eid.hex());
    if (!smsr.holds(eid)) throw Error(ErrorCode::UnknownEid, "EID not registered at " + smsr.id());
    EidLock lock(smsr, eid);

    const auto* entry = smsr.record(eid).find(owned->aid);
    const Pol1 previous = entry ? entry->pol1_mirror : Pol1{};
    const json mirror{{"type", "SetPolicyMirror"}, {"eid", eid.hex()}, {"aid", to_hex(owned->aid)}};

    auto update = mirror;
    update["pol1"] = rules.to_string();
    ask(net, mno.id(), smsr.id(), "pol1:mirror", update);

    Bytes data = with_aid(owned->aid);
    tlv::put(data, kTagMnoRecord, owned->session.wrap_bytes(Bytes{rules.to_bits()}, owned->aid));
    std::optional<ApduResponse> response;
    std::string failure;
    try {
        response = relay_call(net, mno.id(), smsr, Layer::MnoProfile, eid,
                              apdu::make_command(Ins::UpdatePol1, 0, 0, data), "pol1:card");
    } catch (const Error& e) {
        failure = e.what();
    }
    if (response && response->ok()) return;

    auto revert = mirror;
    revert["pol1"] = previous.to_string();
    try {
        ask(net, mno.id(), smsr.id(), "pol1:revert", revert);
    } catch (const Error& e) {
        net.annotate(std::string("mirror revert failed: ") + e.what());
    }
    if (!response) throw Error(ErrorCode::Timeout, failure);
    throw Error(error_for_status(response->status),
                "POL1 update refused: " + std::string(apdu::status_name(response->status)));
}

void smsr_change(Network& net, Mno& mno, SmSr& old_smsr, SmSr& new_smsr, const Eid& eid) {
    if (!old_smsr.holds(eid)) throw Error(ErrorCode::UnknownEid, old_smsr.id() + " does not manage " + eid.hex());
    if (&old_smsr == &new_smsr) throw Error(ErrorCode::WrongData, "handover to the same SM-SR");
    EidLock old_lock(old_smsr, eid);
    EidLock new_lock(new_smsr, eid);

    // 1, 2
    const auto notice = envelope(mno.id(), new_smsr.id(), Layer::ActorPlain, "handover:1",
                                 network::plain({{"type", "SmsrChangeNotice"}, {"eid", eid.hex()},
                                                 {"from", old_smsr.id()}}));
    const auto notice_seq = net.send(notice);
    const auto arrived = net.await_message(new_smsr.id(), notice_seq);
    if (Eid::from_hex(text(network::parse_plain(arrived.payload), "eid")) != eid)
        throw Error(ErrorCode::WrongData, "handover notice names a different card");

    const bool accept = new_smsr.can_accept();
    auto answer = envelope(new_smsr.id(), mno.id(), Layer::ActorPlain, "handover:2",
                           network::plain({{"type", "CapabilityAnswer"}, {"eid", eid.hex()}, {"accept", accept}}));
    answer.reply_to = notice_seq;
    const auto answer_seq = net.send(std::move(answer));
    const auto verdict = network::parse_plain(net.await_message(mno.id(), answer_seq).payload);
    if (!verdict.value("accept", false))
        throw Error(ErrorCode::CapabilityRefused, new_smsr.id() + " cannot manage " + eid.hex());

    // 3
    post(net, mno.id(), old_smsr.id(), "handover:3",
         {{"type", "StartSmsrChange"}, {"eid", eid.hex()}, {"to", new_smsr.id()}});

    // 4
    const auto transfer = old_smsr.release(eid);
    std::optional<EisTransfer> incoming;
    try {
        const auto body = post(net, old_smsr.id(), new_smsr.id(), "handover:4",
                               {{"type", "EisHandover"}, {"transfer", transfer.to_json()}});
        incoming = EisTransfer::from_json(body.at("transfer"));
        if (incoming->record.eid != eid) throw Error(ErrorCode::WrongData, "EIS for a different card");
        new_smsr.accept_incoming(*incoming);
    } catch (const Error&) {
        old_smsr.restore(eid, transfer.send_counter, transfer.recv_counter);
        throw;
    } catch (const json::exception& e) {
        old_smsr.restore(eid, transfer.send_counter, transfer.recv_counter);
        throw Error(ErrorCode::WrongData, e.what());
    }

    auto give_back = [&](const std::string& why) {
        const auto [send_counter, recv_counter] = new_smsr.drop_incoming(eid);
        try {
            post(net, new_smsr.id(), old_smsr.id(), "handover:abort",
                 {{"type", "SmsrChangeAbort"},
                  {"eid", eid.hex()},
                  {"send_counter", send_counter},
                  {"recv_counter", recv_counter}});
        } catch (const Error& e) {
            net.annotate(std::string("abort notice lost: ") + e.what());
        }
        old_smsr.restore(eid, send_counter, recv_counter);
        throw Error(ErrorCode::EstablishmentFailed, why);
    };

    // 5
    std::optional<crypto::SymmetricKey> new_k80;
    try {
        const auto& own = new_smsr.credentials();
        crypto::EckaInitiator initiator(own.keys, own.certificate, own.ci_root, incoming->record.euicc_certificate,
                                        std::string(crypto::kSmsrKeyContext), crypto::KeyRole::K80);
        Bytes hello;
        tlv::put(hello, kTagCertificate, initiator.hello());
        auto response = new_smsr.exchange(net, eid, apdu::make_command(Ins::ReplaceSmsrKey, 0x01, 0, hello),
                                          "handover:5");
        require_ok(response, ErrorCode::EstablishmentFailed, "key establishment");
        const auto challenge = tlv::require(tlv::parse(response.data), kTagChallenge);

        Bytes offer;
        tlv::put(offer, kTagOffer, initiator.on_challenge(challenge, new_smsr.rng()));
        response = new_smsr.exchange(net, eid, apdu::make_command(Ins::ReplaceSmsrKey, 0x02, 0, offer),
                                     "handover:5");
        require_ok(response, ErrorCode::EstablishmentFailed, "key establishment offer");
        new_k80 = *initiator.key();
        initiator.wipe();
    } catch (const Error& e) {
        give_back(e.what());
    }

    // 6: once the card commits only the new key works, so a lost answer is
    // settled by probing with it.
    SecureChannelSession fresh(*new_k80, ChannelRole::Initiator, network::card_address(eid.hex()));
    bool committed = false;
    try {
        committed = new_smsr.exchange(net, eid, apdu::make_command(Ins::ReplaceSmsrKey, 0x03), "handover:6").ok();
    } catch (const Error&) {
    }
    if (!committed) {
        try {
            committed = new_smsr.exchange(net, eid, apdu::make_command(Ins::Ping), "handover:probe", &fresh).ok();
        } catch (const Error&) {
        }
    }
    if (!committed) give_back("the card did not confirm the new key");
    new_smsr.adopt(eid, std::move(fresh));

    // 7
    const json done{{"type", "SmsrChangeComplete"}, {"eid", eid.hex()}};
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            post(net, new_smsr.id(), old_smsr.id(), "handover:7", done);
            old_smsr.forget(eid);
            break;
        } catch (const Error& e) {
            net.annotate(std::string("completion notice lost: ") + e.what());
        }
    }
    try {
        post(net, new_smsr.id(), mno.id(), "handover:7", {{"type", "SmsrChangeResult"}, {"eid", eid.hex()}});
    } catch (const Error&) {
    }
}

apdu::StatusWord profile_command(Network& net, const Mno& requester, SmSr& smsr, const Eid& eid, ProfileOp op,
                                 const Aid& aid) {
    if (!smsr.holds(eid)) throw Error(ErrorCode::UnknownEid, "EID not registered at " + smsr.id());
    EidLock lock(smsr, eid);
    json body{{"type", "ProfileCommand"}, {"eid", eid.hex()}, {"aid", to_hex(aid)}, {"op", profile_op_name(op)}};
    if (op == ProfileOp::SetFallback || op == ProfileOp::ClearFallback) body["flag"] = op == ProfileOp::SetFallback;
    const auto reply = ask(net, requester.id(), smsr.id(), std::string(profile_op_name(op)), body);
    const auto sw = from_hex(text(reply, "sw"));
    if (sw.size() != 2) throw Error(ErrorCode::WrongData, "malformed status word");
    const auto value = static_cast<std::uint16_t>(sw[0] << 8 | sw[1]);
    if (!apdu::is_known_status(value)) throw Error(ErrorCode::UnknownStatusWord, "unknown status word");
    return static_cast<StatusWord>(value);
}

bool ping(Network& net, SmSr& smsr, const Eid& eid) {
    try {
        return smsr.exchange(net, eid, apdu::make_command(Ins::Ping), "ping").ok();
    } catch (const Error&) {
        return false;
    }
}

}  // namespace esim::subman
