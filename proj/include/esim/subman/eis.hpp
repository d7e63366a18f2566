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

// eUICC Information Set: what an SM-SR knows about one card.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "esim/crypto/keys.hpp"
#include "esim/euicc/euicc.hpp"
#include "json.hpp"

namespace esim::subman {

using euicc::Aid;
using euicc::Eid;
using policy::Pol1;

enum class EisProfileState : std::uint8_t { Created, Disabled, Enabled };

std::string_view eis_state_name(EisProfileState s);
std::optional<EisProfileState> eis_state_from_name(std::string_view name);

struct EisProfile {
    Aid isdp_id;
    std::string mno_id;  // empty until the SM-DP reports the installation
    EisProfileState state = EisProfileState::Created;
    Pol1 pol1_mirror;    // may lag behind the card
    bool fallback = false;

    bool operator==(const EisProfile&) const = default;
};

struct EisRecord {
    Eid eid;
    std::string eum_id;
    std::string production_date;
    crypto::PublicKey euicc_public_key;
    crypto::Certificate euicc_certificate;
    crypto::SymmetricKey k80;
    std::vector<EisProfile> profiles;

    const EisProfile* find(const Aid& aid) const;
    EisProfile* find(const Aid& aid);
    const EisProfile* enabled() const;

    // With include_secrets=false the k80 is replaced by its fingerprint.
    nlohmann::json to_json(bool include_secrets = true) const;
    // Throws Error(WrongData).
    static EisRecord from_json(const nlohmann::json& j);

    bool operator==(const EisRecord&) const = default;
};

// Builds the initial EIS the EUM hands to the first SM-SR.
EisRecord eis_from_seed(const euicc::EisSeed& seed);

// EIS as the card reports it: every ISD-P with its lifecycle state. Owner and
// POL1 mirror are not visible on the card and are compared separately.
std::vector<EisProfile> card_view(const euicc::Euicc& card);

// True when the EIS profile list matches the card in ISD-P set, state and
// fallback flag (the POL1 mirror is allowed to differ).
bool eis_matches_card(const EisRecord& eis, const euicc::Euicc& card);

// What moves between SM-SRs at handover: the EIS plus the ISD-R channel
// counters, so the receiving side continues the same counter space.
struct EisTransfer {
    EisRecord record;
    std::uint64_t send_counter = 0;
    std::uint64_t recv_counter = 0;

    nlohmann::json to_json() const;
    static EisTransfer from_json(const nlohmann::json& j);
};

// Registry file: one JSON object per line, {"smsr": id, "eis": record}.
struct RegistryLine {
    std::string smsr;
    EisRecord eis;
};

void save_registry(std::ostream& out, const std::vector<RegistryLine>& lines);
// Throws Error(WrongData) with the offending line number.
std::vector<RegistryLine> load_registry(std::istream& in);

}  // namespace esim::subman
