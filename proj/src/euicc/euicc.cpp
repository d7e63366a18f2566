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

#include "esim/euicc/euicc.hpp"

#include <utility>

#include "esim/crypto/kdf.hpp"
#include "esim/error.hpp"
#include "esim/tlv.hpp"

namespace esim::euicc {

using apdu::ApduCommand;
using apdu::ApduResponse;
using apdu::Ins;
using apdu::StatusWord;
using crypto::ChannelRole;
using crypto::SecureChannelSession;

namespace {

constexpr std::uint8_t kTagAid = 0x4F;
constexpr std::uint8_t kTagCertificate = 0x21;
constexpr std::uint8_t kTagChallenge = 0x85;
constexpr std::uint8_t kTagOffer = 0x87;
constexpr std::uint8_t kTagInstallRecord = 0x70;
constexpr std::uint8_t kTagMnoRecord = 0x71;
constexpr std::uint8_t kTagStatusEntry = 0xE3;

constexpr std::string_view kSmsrPeer = "smsr";

ApduResponse ok(Bytes data = {}) { return ApduResponse{std::move(data), StatusWord::Success}; }

Bytes aid_field(const Aid& aid) {
    Bytes out;
    tlv::put(out, kTagAid, aid);
    return out;
}

nlohmann::json pol1_json(const Pol1& p) {
    return {{"disable_disallowed", p.disable_disallowed},
            {"delete_disallowed", p.delete_disallowed},
            {"delete_on_disable", p.delete_on_disable}};
}

}  // namespace

apdu::StatusWord status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound:
            return StatusWord::ReferencedDataNotFound;
        case ErrorCode::SecurityStatus:
        case ErrorCode::TamperDetected:
        case ErrorCode::ReplayDetected:
        case ErrorCode::BadCertificate:
        case ErrorCode::BadSignature:
        case ErrorCode::ChallengeMismatch:
        case ErrorCode::StaleChallenge:
        case ErrorCode::InvalidKey:
        case ErrorCode::SchemeMismatch:
            return StatusWord::SecurityStatusNotSatisfied;
        case ErrorCode::WrongData:
        case ErrorCode::Truncated:
        case ErrorCode::MalformedLength:
        case ErrorCode::OversizeData:
        case ErrorCode::UnknownStatusWord:
        case ErrorCode::ContradictoryRules:
            return StatusWord::WrongData;
        default:
            return StatusWord::ConditionsNotSatisfied;
    }
}

Euicc::Euicc(Eid eid, Ecasd ecasd, crypto::SymmetricKey k80, crypto::DeterministicRandom rng)
    : eid_(eid),
      ecasd_(std::move(ecasd)),
      k80_(k80),
      isdr_session_(k80, ChannelRole::Responder, std::string(kSmsrPeer)),
      rng_(std::move(rng)) {}

Manufactured Euicc::manufacture(const Eid& eid, const crypto::CertificateIssuer& ci, crypto::RandomSource& rng,
                                const ManufactureOptions& options) {
    auto keys = crypto::generate_keypair(rng, crypto::Scheme::KeyAgreement);
    auto cert = ci.issue("euicc:" + eid.hex(), keys.public_key);
    auto k80 = crypto::SymmetricKey::random(rng, crypto::KeyRole::K80);
    Bytes seed_bytes = rng.bytes(8);
    crypto::DeterministicRandom card_rng(get_u64(seed_bytes), "card:" + eid.hex());

    Euicc card(eid, Ecasd{ci.root(), keys, cert}, k80, std::move(card_rng));

    const Aid aid = isdp_aid(0);
    IsdP isdp;
    isdp.id = aid;
    isdp.state = IsdpState::Personalized;
    Profile provisioning{options.provisioning_mno,
                         ProfileKind::Provisioning,
                         ProfileState::Enabled,
                         Pol1{},
                         false,
                         crypto::SymmetricKey::random(rng, crypto::KeyRole::MnoSd),
                         rng.bytes(24)};
    isdp.mno_sd_channel.emplace(provisioning.mno_sd_key, ChannelRole::Responder, provisioning.mno_id);
    isdp.profile = std::move(provisioning);
    card.isdps_.emplace(aid, std::move(isdp));

    EisSeed seed{eid, options.eum_id, options.production_date, cert, k80, aid, options.provisioning_mno};
    return Manufactured{std::move(card), std::move(seed)};
}

const IsdP* Euicc::find(const Aid& isdp) const {
    auto it = isdps_.find(isdp);
    return it == isdps_.end() ? nullptr : &it->second;
}

const IsdP& Euicc::enabled() const {
    for (const auto& [aid, isdp] : isdps_)
        if (isdp.profile && isdp.profile->state == ProfileState::Enabled) return isdp;
    throw std::logic_error("card has no enabled profile");
}

const IsdP* Euicc::fallback() const {
    for (const auto& [aid, isdp] : isdps_)
        if (isdp.profile && isdp.profile->fallback) return &isdp;
    return nullptr;
}

IsdP& Euicc::enabled_slot() { return const_cast<IsdP&>(std::as_const(*this).enabled()); }

IsdP* Euicc::fallback_slot() { return const_cast<IsdP*>(std::as_const(*this).fallback()); }

IsdP& Euicc::require(const Aid& isdp) {
    auto it = isdps_.find(isdp);
    if (it == isdps_.end()) throw Error(ErrorCode::NotFound, "unknown ISD-P " + to_hex(isdp));
    return it->second;
}

IsdP& Euicc::require_personalized(const Aid& isdp) {
    auto& target = require(isdp);
    if (target.state != IsdpState::Personalized || !target.profile)
        throw Error(ErrorCode::NotPersonalized, "ISD-P holds no profile");
    return target;
}

Aid Euicc::next_free_aid() const {
    for (std::uint32_t n = 0;; ++n) {
        auto aid = isdp_aid(n);
        if (!isdps_.contains(aid)) return aid;
    }
}

Aid Euicc::create_isdp(std::optional<Aid> requested) {
    Aid aid = requested ? *requested : next_free_aid();
    if (aid.size() < kMinAidSize || aid.size() > kMaxAidSize) throw Error(ErrorCode::WrongData, "AID length");
    if (isdps_.contains(aid)) throw Error(ErrorCode::DuplicateId, "ISD-P already exists");
    transact([&](Euicc& c) {
        IsdP isdp;
        isdp.id = aid;
        c.isdps_.emplace(aid, std::move(isdp));
    });
    return aid;
}

Bytes Euicc::begin_key_agreement(const Aid& aid, ByteView initiator_certificate) {
    auto& isdp = require(aid);
    if (isdp.state != IsdpState::Created || isdp.install_key)
        throw Error(ErrorCode::WrongState, "key agreement only runs on a fresh ISD-P");
    isdp.ecka.emplace(ecasd_.euicc_keys, ecasd_.ci_root, std::string(crypto::kProfileCredentialsContext),
                      crypto::KeyRole::ProfileCredentials);
    try {
        return isdp.ecka->on_certificate(initiator_certificate, rng_);
    } catch (...) {
        isdp.ecka.reset();
        throw;
    }
}

void Euicc::complete_key_agreement(const Aid& aid, ByteView offer) {
    auto& isdp = require(aid);
    if (!isdp.ecka) throw Error(ErrorCode::StaleChallenge, "no key agreement in progress");
    auto responder = std::move(*isdp.ecka);
    isdp.ecka.reset();
    auto k = responder.on_offer(offer);
    responder.wipe();
    transact([&](Euicc& c) {
        auto& target = c.require(aid);
        target.install_key = k;
        target.install_channel.emplace(k, ChannelRole::Responder, "smdp");
        target.install_channel_open = false;
    });
}

void Euicc::open_install_channel(const Aid& aid, ByteView record) {
    auto& isdp = require(aid);
    if (!isdp.install_key || !isdp.install_channel) throw Error(ErrorCode::NoKey, "no installation key");
    auto plaintext = isdp.install_channel->unwrap_bytes(record, aid);
    if (plaintext != aid) throw Error(ErrorCode::WrongData, "channel confirmation does not name this ISD-P");
    isdp.install_channel_open = true;
}

void Euicc::install_profile(const Aid& aid, ByteView record) {
    auto& isdp = require(aid);
    if (!isdp.install_key || !isdp.install_channel) throw Error(ErrorCode::NoKey, "no installation key");
    if (!isdp.install_channel_open) throw Error(ErrorCode::WrongState, "installation channel not open");
    auto plaintext = isdp.install_channel->unwrap_bytes(record, aid);
    auto profile = Profile::parse(plaintext);
    transact([&](Euicc& c) {
        auto& target = c.require(aid);
        target.mno_sd_channel.emplace(profile.mno_sd_key, ChannelRole::Responder, profile.mno_id);
        target.profile = std::move(profile);
        target.state = IsdpState::Personalized;
        target.install_key.reset();
        target.install_channel.reset();
        target.install_channel_open = false;
    });
}

void Euicc::enable_profile(const Aid& aid) {
    transact([&](Euicc& c) {
        auto& target = c.require_personalized(aid);
        if (target.profile->state == ProfileState::Enabled)
            throw Error(ErrorCode::ProfileEnabled, "profile already enabled");
        auto& previous = c.enabled_slot();
        const auto decision = policy::check_disable(previous.profile->pol1);
        if (!decision.allowed()) throw Error(ErrorCode::PolicyDenied, "enabled profile is locked");
        previous.profile->state = ProfileState::Disabled;
        target.profile->state = ProfileState::Enabled;
        target.profile->fallback = false;
        if (decision.followup == policy::Followup::DeleteProfile) c.isdps_.erase(previous.id);
    });
}

void Euicc::disable_profile(const Aid& aid) {
    transact([&](Euicc& c) {
        auto& target = c.require_personalized(aid);
        if (target.profile->state != ProfileState::Enabled)
            throw Error(ErrorCode::NotEnabled, "profile is not enabled");
        const auto decision = policy::check_disable(target.profile->pol1);
        if (!decision.allowed()) throw Error(ErrorCode::PolicyDenied, "profile is locked");

        IsdP* replacement = c.fallback_slot();
        if (!replacement) {
            for (auto& [id, isdp] : c.isdps_)
                if (isdp.profile && isdp.profile->kind == ProfileKind::Provisioning) replacement = &isdp;
        }
        if (!replacement || replacement->id == aid)
            throw Error(ErrorCode::NoFallbackTarget, "no profile to fall back to");

        target.profile->state = ProfileState::Disabled;
        replacement->profile->state = ProfileState::Enabled;
        replacement->profile->fallback = false;
        if (decision.followup == policy::Followup::DeleteProfile) c.isdps_.erase(target.id);
    });
}

void Euicc::delete_profile(const Aid& aid) {
    transact([&](Euicc& c) {
        auto& target = c.require(aid);
        if (target.profile) {
            const auto& profile = *target.profile;
            if (profile.kind == ProfileKind::Provisioning)
                throw Error(ErrorCode::PolicyDenied, "the provisioning profile cannot be deleted");
            if (profile.state == ProfileState::Enabled)
                throw Error(ErrorCode::CannotDeleteEnabled, "disable the profile first");
            if (!policy::check_delete(profile.pol1, profile.state).allowed())
                throw Error(ErrorCode::PolicyDenied, "POL1 forbids deletion");
        }
        c.isdps_.erase(aid);
    });
}

void Euicc::set_fallback(const Aid& aid, bool flag) {
    transact([&](Euicc& c) {
        auto& target = c.require_personalized(aid);
        if (!flag) {
            target.profile->fallback = false;
            return;
        }
        if (target.profile->state == ProfileState::Enabled)
            throw Error(ErrorCode::ProfileEnabled, "fallback can only be set on a disabled profile");
        const IsdP* holder = c.fallback();
        if (holder && holder->id != aid) throw Error(ErrorCode::FallbackAlreadySet, "another profile holds fallback");
        target.profile->fallback = true;
    });
}

Bytes Euicc::unwrap_mno(IsdP& isdp, ByteView record) {
    if (!isdp.mno_sd_channel) throw Error(ErrorCode::SecurityStatus, "no MNO-SD channel");
    try {
        return isdp.mno_sd_channel->unwrap_bytes(record, isdp.id);
    } catch (const Error& e) {
        throw Error(ErrorCode::SecurityStatus, std::string("MNO-SD authentication failed: ") + e.what());
    }
}

void Euicc::update_pol1(const Aid& aid, ByteView record) {
    auto plaintext = unwrap_mno(require_personalized(aid), record);
    transact([&](Euicc& c) {
        auto& profile = *c.require_personalized(aid).profile;
        if (profile.kind == ProfileKind::Provisioning)
            throw Error(ErrorCode::PolicyDenied, "provisioning profile rules are fixed");
        if (profile.state != ProfileState::Enabled)
            throw Error(ErrorCode::NotEnabled, "POL1 can only be updated on the enabled profile");
        if (plaintext.size() != 1) throw Error(ErrorCode::WrongData, "POL1 update must be one octet");
        profile.pol1 = Pol1::from_bits(plaintext[0]);
    });
}

Bytes Euicc::read_profile_data(const Aid& aid, ByteView record) {
    auto& isdp = require_personalized(aid);
    unwrap_mno(isdp, record);
    return isdp.mno_sd_channel->wrap_bytes(isdp.profile->naa_params, aid);
}

void Euicc::update_profile_data(const Aid& aid, ByteView record) {
    auto plaintext = unwrap_mno(require_personalized(aid), record);
    if (plaintext.empty()) throw Error(ErrorCode::WrongData, "empty NAA parameters");
    transact([&](Euicc& c) { c.require_personalized(aid).profile->naa_params = plaintext; });
}

Bytes Euicc::begin_smsr_key_replacement(ByteView smsr_certificate) {
    smsr_ecka_.emplace(ecasd_.euicc_keys, ecasd_.ci_root, std::string(crypto::kSmsrKeyContext), crypto::KeyRole::K80);
    try {
        auto challenge = smsr_ecka_->on_certificate(smsr_certificate, rng_);
        transact([](Euicc& c) { c.pending_k80_.reset(); });
        return challenge;
    } catch (...) {
        smsr_ecka_.reset();
        throw;
    }
}

void Euicc::complete_smsr_key_replacement(ByteView offer) {
    if (!smsr_ecka_) throw Error(ErrorCode::StaleChallenge, "no key establishment in progress");
    auto responder = std::move(*smsr_ecka_);
    smsr_ecka_.reset();
    auto k = responder.on_offer(offer);
    responder.wipe();
    transact([&](Euicc& c) { c.pending_k80_ = k; });
}

void Euicc::commit_smsr_key() {
    if (!pending_k80_) throw Error(ErrorCode::EstablishmentFailed, "no established replacement key");
    transact([](Euicc& c) {
        c.k80_ = *c.pending_k80_;
        c.pending_k80_.reset();
        c.isdr_session_ = SecureChannelSession(c.k80_, ChannelRole::Responder, std::string(kSmsrPeer));
        ++c.k80_generation_;
    });
}

apdu::ApduResponse Euicc::process_apdu(const CommandContext& context, const ApduCommand& command) {
    try {
        return dispatch(context, command);
    } catch (const Error& e) {
        return ApduResponse{{}, status_for(e.code())};
    }
}

apdu::ApduResponse Euicc::dispatch(const CommandContext& context, const ApduCommand& cmd) {
    if (cmd.cla != apdu::kCla) throw Error(ErrorCode::WrongData, "unsupported class");
    const auto ins = static_cast<Ins>(cmd.ins);
    if (context.origin != Origin::IsdR && ins != Ins::EstablishKey)
        throw Error(ErrorCode::SecurityStatus, "command requires the ISD-R channel");

    const auto fields = tlv::parse(cmd.data);
    auto target = [&] { return tlv::require(fields, kTagAid); };

    switch (ins) {
        case Ins::CreateIsdp: {
            auto requested = tlv::find(fields, kTagAid);
            return ok(aid_field(create_isdp(requested)));
        }
        case Ins::EstablishKey:
            if (cmd.p1 == 0x01) {
                Bytes out;
                tlv::put(out, kTagChallenge, begin_key_agreement(target(), tlv::require(fields, kTagCertificate)));
                return ok(std::move(out));
            }
            if (cmd.p1 == 0x02) {
                complete_key_agreement(target(), tlv::require(fields, kTagOffer));
                return ok();
            }
            break;
        case Ins::InstallProfile:
            if (cmd.p1 == 0x01) {
                open_install_channel(target(), tlv::require(fields, kTagInstallRecord));
                return ok();
            }
            if (cmd.p1 == 0x02) {
                install_profile(target(), tlv::require(fields, kTagInstallRecord));
                return ok();
            }
            break;
        case Ins::EnableProfile:
            enable_profile(target());
            return ok();
        case Ins::DisableProfile:
            disable_profile(target());
            return ok();
        case Ins::DeleteProfile:
            delete_profile(target());
            return ok();
        case Ins::SetFallback:
            if (cmd.p1 > 0x01) break;
            set_fallback(target(), cmd.p1 == 0x01);
            return ok();
        case Ins::GetStatus: {
            Bytes out;
            for (const auto& [aid, isdp] : isdps_) {
                Bytes entry;
                tlv::put(entry, kTagAid, aid);
                tlv::put(entry, 0x80, Bytes{static_cast<std::uint8_t>(isdp.state)});
                if (isdp.profile) {
                    tlv::put(entry, 0x81, Bytes{static_cast<std::uint8_t>(isdp.profile->state)});
                    tlv::put(entry, 0x82, Bytes{static_cast<std::uint8_t>(isdp.profile->fallback)});
                    tlv::put(entry, 0x83, Bytes{static_cast<std::uint8_t>(isdp.profile->kind)});
                }
                tlv::put(out, kTagStatusEntry, entry);
            }
            return ok(std::move(out));
        }
        case Ins::UpdatePol1: {
            auto record = tlv::find(fields, kTagMnoRecord);
            if (!record) throw Error(ErrorCode::SecurityStatus, "ISD-R cannot modify profile content");
            update_pol1(target(), *record);
            return ok();
        }
        case Ins::ReadProfileData: {
            auto record = tlv::find(fields, kTagMnoRecord);
            if (!record) throw Error(ErrorCode::SecurityStatus, "ISD-R cannot read profile content");
            Bytes out;
            tlv::put(out, kTagMnoRecord, read_profile_data(target(), *record));
            return ok(std::move(out));
        }
        case Ins::UpdateProfileData: {
            auto record = tlv::find(fields, kTagMnoRecord);
            if (!record) throw Error(ErrorCode::SecurityStatus, "ISD-R cannot modify profile content");
            update_profile_data(target(), *record);
            return ok();
        }
        case Ins::ReplaceSmsrKey:
            if (cmd.p1 == 0x01) {
                Bytes out;
                tlv::put(out, kTagChallenge, begin_smsr_key_replacement(tlv::require(fields, kTagCertificate)));
                return ok(std::move(out));
            }
            if (cmd.p1 == 0x02) {
                complete_smsr_key_replacement(tlv::require(fields, kTagOffer));
                return ok();
            }
            if (cmd.p1 == 0x03) {
                commit_smsr_key();
                return ok();
            }
            break;
        case Ins::Ping:
            return ok();
    }
    throw Error(ErrorCode::WrongData, "unsupported instruction or parameter");
}

Bytes Euicc::handle_ota(ByteView record) {
    Bytes plaintext;
    try {
        plaintext = isdr_session_.unwrap_bytes(record, eid_.bytes());
    } catch (const Error&) {
        return apdu::encode_response({{}, StatusWord::SecurityStatusNotSatisfied});
    }
    // The response travels under the key the command arrived on, even when
    // the command itself retires that key.
    SecureChannelSession channel = isdr_session_;
    const auto generation = k80_generation_;

    ApduResponse response;
    try {
        response = process_apdu(CommandContext{Origin::IsdR}, apdu::decode_command(plaintext));
    } catch (const Error&) {
        response = ApduResponse{{}, StatusWord::WrongData};
    }
    Bytes out = channel.wrap_bytes(apdu::encode_response(response), eid_.bytes());
    if (generation == k80_generation_) isdr_session_ = std::move(channel);
    return out;
}

nlohmann::json Euicc::snapshot() const {
    nlohmann::json isdps = nlohmann::json::array();
    for (const auto& [aid, isdp] : isdps_) {
        nlohmann::json entry{{"aid", to_hex(aid)},
                             {"state", isdp_state_name(isdp.state)},
                             {"install_key", isdp.install_key ? nlohmann::json(isdp.install_key->fingerprint())
                                                              : nlohmann::json(nullptr)}};
        if (isdp.profile) {
            const auto& p = *isdp.profile;
            entry["profile"] = {{"mno_id", p.mno_id},
                                {"kind", kind_name(p.kind)},
                                {"state", profile_state_name(p.state)},
                                {"pol1", pol1_json(p.pol1)},
                                {"fallback", p.fallback},
                                {"mno_sd_key", p.mno_sd_key.fingerprint()},
                                {"naa_params", to_hex(p.naa_params)}};
        } else {
            entry["profile"] = nullptr;
        }
        isdps.push_back(std::move(entry));
    }
    return {{"eid", eid_.hex()},
            {"euicc_public_key", to_hex(ecasd_.euicc_keys.public_key.bytes)},
            {"k80", k80_.fingerprint()},
            {"pending_k80", pending_k80_ ? nlohmann::json(pending_k80_->fingerprint()) : nlohmann::json(nullptr)},
            {"isdps", std::move(isdps)}};
}

}  // namespace esim::euicc
