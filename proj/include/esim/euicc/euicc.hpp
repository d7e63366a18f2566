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

// The card: ISD-R, ECASD and the ISD-P tree with their profiles.
//
// Every public operation is atomic with respect to the logical state (the
// part reported by snapshot()): on error it is left exactly as before.
// Transport state, i.e. channel counters and in-flight key agreement, is
// advanced or wiped independently so that a rejected command can neither be
// replayed nor leave key material behind.
//
// Invariants held after every operation:
//   - exactly one profile is Enabled;
//   - at most one profile carries the fallback flag, and it is Disabled;
//   - the provisioning profile is never deleted;
//   - exactly one k80 is live.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "esim/apdu.hpp"
#include "esim/crypto/keys.hpp"
#include "esim/crypto/random.hpp"
#include "esim/crypto/secure_channel.hpp"
#include "esim/error.hpp"
#include "esim/euicc/types.hpp"
#include "json.hpp"

namespace esim::euicc {

// Where a command came from after ISD-R dispatch.
enum class Origin : std::uint8_t {
    IsdR,             // arrived under the SM-SR k80 channel
    Unauthenticated,  // no channel; only key-agreement messages are accepted
};

struct CommandContext {
    Origin origin = Origin::IsdR;
};

struct EisSeed {
    Eid eid;
    std::string eum_id;
    std::string production_date;
    crypto::Certificate euicc_certificate;
    crypto::SymmetricKey k80;
    Aid provisioning_aid;
    std::string provisioning_mno;
};

struct ManufactureOptions {
    std::string eum_id = "eum";
    std::string production_date = "2020-01-01";
    std::string provisioning_mno = "bootstrap";
};

struct Manufactured;

class Euicc {
public:
    static Manufactured manufacture(const Eid& eid, const crypto::CertificateIssuer& ci, crypto::RandomSource& rng,
                                    const ManufactureOptions& options = {});

    // ISD-R functions.
    Aid create_isdp(std::optional<Aid> requested = std::nullopt);
    Bytes begin_key_agreement(const Aid& isdp, ByteView initiator_certificate);
    void complete_key_agreement(const Aid& isdp, ByteView offer);
    void open_install_channel(const Aid& isdp, ByteView record);
    void install_profile(const Aid& isdp, ByteView record);
    void enable_profile(const Aid& isdp);
    void disable_profile(const Aid& isdp);
    void delete_profile(const Aid& isdp);
    void set_fallback(const Aid& isdp, bool flag);

    // MNO-SD functions; `record` is wrapped under the profile's MNO-SD key
    // with the ISD-P AID as associated data.
    void update_pol1(const Aid& isdp, ByteView record);
    Bytes read_profile_data(const Aid& isdp, ByteView record);
    void update_profile_data(const Aid& isdp, ByteView record);

    // SM-SR key replacement: ECKA with the new SM-SR, then commit.
    Bytes begin_smsr_key_replacement(ByteView smsr_certificate);
    void complete_smsr_key_replacement(ByteView offer);
    void commit_smsr_key();

    // Dispatches by INS; failures are reported as status words.
    apdu::ApduResponse process_apdu(const CommandContext& context, const apdu::ApduCommand& command);

    // Over-the-air entry point: unwraps under k80 (with the EID as associated
    // data), dispatches, and wraps the response. A record that fails to
    // unwrap gets a bare, unprotected SECURITY_STATUS_NOT_SATISFIED.
    Bytes handle_ota(ByteView record);

    const Eid& eid() const { return eid_; }
    const Ecasd& ecasd() const { return ecasd_; }
    const std::map<Aid, IsdP>& isdps() const { return isdps_; }
    const IsdP* find(const Aid& isdp) const;
    const IsdP& enabled() const;
    const IsdP* fallback() const;
    std::string k80_fingerprint() const { return k80_.fingerprint(); }
    bool has_pending_k80() const { return pending_k80_.has_value(); }
    const crypto::SecureChannelSession& isdr_session() const { return isdr_session_; }

    // Logical state as JSON. Key material appears only as fingerprints.
    nlohmann::json snapshot() const;
    std::string snapshot_text() const { return snapshot().dump(2); }

private:
    Euicc(Eid eid, Ecasd ecasd, crypto::SymmetricKey k80, crypto::DeterministicRandom rng);

    template <typename F>
    void transact(F&& body) {
        Euicc next = *this;
        body(next);
        *this = std::move(next);
    }

    IsdP& require(const Aid& isdp);
    IsdP& require_personalized(const Aid& isdp);
    IsdP& enabled_slot();
    IsdP* fallback_slot();
    Aid next_free_aid() const;
    Bytes unwrap_mno(IsdP& isdp, ByteView record);

    apdu::ApduResponse dispatch(const CommandContext& context, const apdu::ApduCommand& command);

    Eid eid_;
    Ecasd ecasd_;
    crypto::SymmetricKey k80_;
    std::optional<crypto::SymmetricKey> pending_k80_;
    crypto::SecureChannelSession isdr_session_;
    std::uint64_t k80_generation_ = 0;
    std::optional<crypto::EckaResponder> smsr_ecka_;
    std::map<Aid, IsdP> isdps_;
    crypto::DeterministicRandom rng_;
};

struct Manufactured {
    Euicc card;
    EisSeed eis;
};

apdu::StatusWord status_for(ErrorCode code);

}  // namespace esim::euicc
