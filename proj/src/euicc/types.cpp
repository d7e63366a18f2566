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

#include "esim/euicc/types.hpp"

#include "esim/error.hpp"
#include "esim/tlv.hpp"

namespace esim::euicc {

namespace {

constexpr std::uint8_t kTagMno = 0x81;
constexpr std::uint8_t kTagPol1 = 0x82;
constexpr std::uint8_t kTagMnoSdKey = 0x83;
constexpr std::uint8_t kTagNaa = 0x84;

constexpr std::array<std::uint8_t, 12> kAidPrefix{0xA0, 0x00, 0x00, 0x05, 0x59, 0x10,
                                                  0x10, 0xFF, 0xFF, 0xFF, 0xFF, 0x89};

}  // namespace

Eid Eid::from_hex(std::string_view hex) {
    if (hex.size() != 32) throw Error(ErrorCode::WrongData, "EID must be 32 hex digits");
    return from_bytes(esim::from_hex(hex));
}

Eid Eid::from_bytes(ByteView bytes) {
    if (bytes.size() != 16) throw Error(ErrorCode::WrongData, "EID must be 16 octets");
    std::array<std::uint8_t, 16> octets{};
    std::copy(bytes.begin(), bytes.end(), octets.begin());
    return Eid(octets);
}

Eid Eid::numbered(std::uint64_t index) {
    std::array<std::uint8_t, 16> octets{0x89, 0x04, 0x90, 0x32};
    for (int i = 0; i < 8; ++i) octets[8 + i] = static_cast<std::uint8_t>(index >> (56 - 8 * i));
    return Eid(octets);
}

Aid isdp_aid(std::uint32_t n) {
    Aid aid(kAidPrefix.begin(), kAidPrefix.end());
    const std::uint32_t suffix = 0x1000 + n;
    for (int shift = 24; shift >= 0; shift -= 8) aid.push_back(static_cast<std::uint8_t>(suffix >> shift));
    return aid;
}

std::string_view kind_name(ProfileKind k) { return k == ProfileKind::Provisioning ? "Provisioning" : "Operational"; }

std::string_view profile_state_name(ProfileState s) { return s == ProfileState::Enabled ? "Enabled" : "Disabled"; }

std::string_view isdp_state_name(IsdpState s) { return s == IsdpState::Created ? "Created" : "Personalized"; }

Bytes Profile::serialize() const {
    Bytes out;
    tlv::put(out, kTagMno, to_bytes(mno_id));
    tlv::put(out, kTagPol1, Bytes{pol1.to_bits()});
    tlv::put(out, kTagMnoSdKey, mno_sd_key.material());
    tlv::put(out, kTagNaa, naa_params);
    return out;
}

Profile Profile::parse(ByteView bytes) {
    const auto fields = tlv::parse(bytes);
    const auto mno = tlv::require(fields, kTagMno);
    const auto bits = tlv::require(fields, kTagPol1);
    if (bits.size() != 1) throw Error(ErrorCode::WrongData, "POL1 field must be one octet");
    auto key = tlv::require(fields, kTagMnoSdKey);
    if (key.size() != crypto::kSymmetricKeySize) throw Error(ErrorCode::WrongData, "MNO-SD key length");
    auto naa = tlv::require(fields, kTagNaa);
    if (mno.empty()) throw Error(ErrorCode::WrongData, "empty MNO identifier");
    return Profile{std::string(mno.begin(), mno.end()),
                   ProfileKind::Operational,
                   ProfileState::Disabled,
                   Pol1::from_bits(bits[0]),
                   false,
                   crypto::SymmetricKey(std::move(key), crypto::KeyRole::MnoSd),
                   std::move(naa)};
}

}  // namespace esim::euicc
