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

// Command/response APDU framing (ISO/IEC 7816-4 short and extended cases) and
// the constant tables that form the simulator's card wire contract.
//
// Encoding is canonical: short-form lengths are used whenever both Lc and Le
// fit (Lc <= 255, Le <= 256); otherwise both use the extended form. The
// decoder rejects non-canonical inputs so that exactly one byte sequence maps
// to each logical command.

#include <cstdint>
#include <optional>
#include <string_view>

#include "esim/bytes.hpp"

namespace esim::apdu {

inline constexpr std::size_t kMaxData = 0xFFFF;
inline constexpr std::uint32_t kMaxLe = 0x10000;

enum class StatusWord : std::uint16_t {
    Success = 0x9000,
    ConditionsNotSatisfied = 0x6985,
    ReferencedDataNotFound = 0x6A88,
    SecurityStatusNotSatisfied = 0x6982,
    WrongData = 0x6A80,
};

// Instruction bytes for card functions. All commands use CLA 0x80.
enum class Ins : std::uint8_t {
    CreateIsdp = 0xE6,
    InstallProfile = 0xE8,      // P1=01 open ISD-P channel, P1=02 profile upload
    DeleteProfile = 0xE4,
    EnableProfile = 0xF0,
    DisableProfile = 0xF1,
    GetStatus = 0xF2,
    SetFallback = 0xF3,         // P1=01 set, P1=00 clear
    EstablishKey = 0x88,        // P1=01 certificate, P1=02 ephemeral key
    UpdatePol1 = 0xDA,
    ReplaceSmsrKey = 0xD8,      // P1=01 certificate, P1=02 ephemeral key, P1=03 commit
    ReadProfileData = 0xB0,
    UpdateProfileData = 0xD6,
    Ping = 0xCA,
};

inline constexpr std::uint8_t kCla = 0x80;

struct ApduCommand {
    std::uint8_t cla = 0;
    std::uint8_t ins = 0;
    std::uint8_t p1 = 0;
    std::uint8_t p2 = 0;
    Bytes data;
    std::optional<std::uint32_t> le;  // 1..65536 when present

    bool operator==(const ApduCommand&) const = default;
};

struct ApduResponse {
    Bytes data;
    StatusWord status = StatusWord::Success;

    bool ok() const { return status == StatusWord::Success; }
    bool operator==(const ApduResponse&) const = default;
};

ApduCommand make_command(Ins ins, std::uint8_t p1 = 0, std::uint8_t p2 = 0, Bytes data = {});

Bytes encode_command(const ApduCommand& cmd);
ApduCommand decode_command(ByteView bytes);

Bytes encode_response(const ApduResponse& response);
ApduResponse decode_response(ByteView bytes);

bool is_known_status(std::uint16_t sw);
std::string_view status_name(StatusWord sw);
std::optional<StatusWord> status_from_name(std::string_view name);
std::string_view ins_name(std::uint8_t ins);

}  // namespace esim::apdu
