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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "esim/bytes.hpp"
#include "esim/crypto/ecka.hpp"
#include "esim/crypto/keys.hpp"
#include "esim/crypto/secure_channel.hpp"
#include "esim/policy.hpp"

namespace esim::euicc {

using Aid = Bytes;
using policy::Pol1;
using policy::ProfileState;

inline constexpr std::size_t kMinAidSize = 5;
inline constexpr std::size_t kMaxAidSize = 16;

// 16-octet card identifier, printed as 32 hex digits.
class Eid {
public:
    Eid() = default;
    explicit Eid(const std::array<std::uint8_t, 16>& octets) : octets_(octets) {}

    // Throws Error(WrongData) unless `hex` is exactly 32 hex digits.
    static Eid from_hex(std::string_view hex);
    static Eid from_bytes(ByteView bytes);
    // Deterministic EID for simulation runs: 89 049032 prefix + index.
    static Eid numbered(std::uint64_t index);

    std::string hex() const { return to_hex(octets_); }
    ByteView bytes() const { return octets_; }

    auto operator<=>(const Eid&) const = default;

private:
    std::array<std::uint8_t, 16> octets_{};
};

// Card-assigned ISD-P identifier for slot `n`.
Aid isdp_aid(std::uint32_t n);

enum class ProfileKind : std::uint8_t { Provisioning, Operational };
enum class IsdpState : std::uint8_t { Created, Personalized };

std::string_view kind_name(ProfileKind k);
std::string_view profile_state_name(ProfileState s);
std::string_view isdp_state_name(IsdpState s);

struct Ecasd {
    crypto::PublicKey ci_root;
    crypto::KeyPair euicc_keys;  // x25519, the card's static ECKA key
    crypto::Certificate certificate;
};

struct Profile {
    std::string mno_id;
    ProfileKind kind = ProfileKind::Operational;
    ProfileState state = ProfileState::Disabled;
    Pol1 pol1;
    bool fallback = false;
    crypto::SymmetricKey mno_sd_key;
    Bytes naa_params;

    // Transfer encoding used inside the install record:
    // 81 mno-id, 82 POL1 bits, 83 MNO-SD key, 84 NAA parameters.
    Bytes serialize() const;
    // Always yields an Operational, Disabled, non-fallback profile.
    static Profile parse(ByteView bytes);
};

struct IsdP {
    Aid id;
    IsdpState state = IsdpState::Created;
    std::optional<Profile> profile;
    std::optional<crypto::SymmetricKey> install_key;

    // Transport state; not part of the logical snapshot.
    std::optional<crypto::EckaResponder> ecka;
    std::optional<crypto::SecureChannelSession> install_channel;
    bool install_channel_open = false;
    std::optional<crypto::SecureChannelSession> mno_sd_channel;
};

}  // namespace esim::euicc
