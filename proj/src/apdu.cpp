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

#include "esim/apdu.hpp"

#include <array>

#include "esim/error.hpp"

namespace esim::apdu {

namespace {

bool fits_short(const ApduCommand& cmd) {
    return cmd.data.size() <= 0xFF && (!cmd.le || *cmd.le <= 0x100);
}

std::uint32_t short_le(std::uint8_t b) { return b == 0 ? 0x100 : b; }
std::uint32_t extended_le(std::uint8_t hi, std::uint8_t lo) {
    std::uint32_t v = (static_cast<std::uint32_t>(hi) << 8) | lo;
    return v == 0 ? kMaxLe : v;
}

struct StatusEntry {
    StatusWord sw;
    std::string_view name;
};

constexpr std::array<StatusEntry, 5> kStatusTable{{
    {StatusWord::Success, "SUCCESS"},
    {StatusWord::ConditionsNotSatisfied, "CONDITIONS_NOT_SATISFIED"},
    {StatusWord::ReferencedDataNotFound, "REFERENCED_DATA_NOT_FOUND"},
    {StatusWord::SecurityStatusNotSatisfied, "SECURITY_STATUS_NOT_SATISFIED"},
    {StatusWord::WrongData, "WRONG_DATA"},
}};

}  // namespace

ApduCommand make_command(Ins ins, std::uint8_t p1, std::uint8_t p2, Bytes data) {
    return ApduCommand{kCla, static_cast<std::uint8_t>(ins), p1, p2, std::move(data), std::nullopt};
}

Bytes encode_command(const ApduCommand& cmd) {
    if (cmd.data.size() > kMaxData) throw Error(ErrorCode::OversizeData, "command data exceeds 65535 octets");
    if (cmd.le && (*cmd.le == 0 || *cmd.le > kMaxLe)) throw Error(ErrorCode::MalformedLength, "Le out of range");

    Bytes out{cmd.cla, cmd.ins, cmd.p1, cmd.p2};
    const auto nc = cmd.data.size();
    if (fits_short(cmd)) {
        if (nc > 0) {
            out.push_back(static_cast<std::uint8_t>(nc));
            append(out, cmd.data);
        }
        if (cmd.le) out.push_back(static_cast<std::uint8_t>(*cmd.le & 0xFF));
        return out;
    }

    out.push_back(0x00);
    if (nc > 0) {
        put_u16(out, static_cast<std::uint16_t>(nc));
        append(out, cmd.data);
    }
    if (cmd.le) put_u16(out, static_cast<std::uint16_t>(*cmd.le & 0xFFFF));
    return out;
}

ApduCommand decode_command(ByteView in) {
    if (in.size() < 4) throw Error(ErrorCode::Truncated, "command header needs 4 octets");
    ApduCommand cmd{in[0], in[1], in[2], in[3], {}, std::nullopt};
    const auto n = in.size();
    if (n == 4) return cmd;

    if (n == 5) {  // case 2S
        cmd.le = short_le(in[4]);
        return cmd;
    }

    if (in[4] != 0) {  // case 3S / 4S
        const std::size_t lc = in[4];
        if (n < 5 + lc) throw Error(ErrorCode::Truncated, "command data shorter than Lc");
        cmd.data.assign(in.begin() + 5, in.begin() + 5 + static_cast<std::ptrdiff_t>(lc));
        if (n == 5 + lc) return cmd;
        if (n == 6 + lc) {
            cmd.le = short_le(in[5 + lc]);
            return cmd;
        }
        throw Error(ErrorCode::MalformedLength, "trailing octets after short-form body");
    }

    // Extended forms start with a zero marker octet.
    if (n < 7) throw Error(ErrorCode::Truncated, "extended length field incomplete");
    if (n == 7) {  // case 2E
        cmd.le = extended_le(in[5], in[6]);
        if (*cmd.le <= 0x100) throw Error(ErrorCode::MalformedLength, "non-canonical extended Le");
        return cmd;
    }
    const std::size_t lc = (static_cast<std::size_t>(in[5]) << 8) | in[6];
    if (lc == 0) throw Error(ErrorCode::MalformedLength, "extended Lc of zero");
    if (n < 7 + lc) throw Error(ErrorCode::Truncated, "command data shorter than Lc");
    cmd.data.assign(in.begin() + 7, in.begin() + 7 + static_cast<std::ptrdiff_t>(lc));
    if (n == 7 + lc) {
        if (lc <= 0xFF) throw Error(ErrorCode::MalformedLength, "non-canonical extended Lc");
        return cmd;
    }
    if (n == 9 + lc) {
        cmd.le = extended_le(in[7 + lc], in[8 + lc]);
        if (fits_short(cmd)) throw Error(ErrorCode::MalformedLength, "non-canonical extended case 4");
        return cmd;
    }
    throw Error(ErrorCode::MalformedLength, "trailing octets after extended body");
}

Bytes encode_response(const ApduResponse& response) {
    Bytes out = response.data;
    put_u16(out, static_cast<std::uint16_t>(response.status));
    return out;
}

ApduResponse decode_response(ByteView in) {
    if (in.size() < 2) throw Error(ErrorCode::Truncated, "response needs a status word");
    const auto body = in.size() - 2;
    const std::uint16_t sw = static_cast<std::uint16_t>((in[body] << 8) | in[body + 1]);
    if (!is_known_status(sw)) throw Error(ErrorCode::UnknownStatusWord, "status word not in table");
    return ApduResponse{Bytes(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(body)), static_cast<StatusWord>(sw)};
}

bool is_known_status(std::uint16_t sw) {
    for (const auto& e : kStatusTable)
        if (static_cast<std::uint16_t>(e.sw) == sw) return true;
    return false;
}

std::string_view status_name(StatusWord sw) {
    for (const auto& e : kStatusTable)
        if (e.sw == sw) return e.name;
    return "UNKNOWN_STATUS";
}

std::optional<StatusWord> status_from_name(std::string_view name) {
    for (const auto& e : kStatusTable)
        if (e.name == name) return e.sw;
    return std::nullopt;
}

std::string_view ins_name(std::uint8_t ins) {
    switch (static_cast<Ins>(ins)) {
        case Ins::CreateIsdp: return "CREATE_ISDP";
        case Ins::InstallProfile: return "INSTALL_PROFILE";
        case Ins::DeleteProfile: return "DELETE";
        case Ins::EnableProfile: return "ENABLE";
        case Ins::DisableProfile: return "DISABLE";
        case Ins::GetStatus: return "GET_STATUS";
        case Ins::SetFallback: return "SET_FALLBACK";
        case Ins::EstablishKey: return "ESTABLISH_KEY";
        case Ins::UpdatePol1: return "UPDATE_POL1";
        case Ins::ReplaceSmsrKey: return "REPLACE_SMSR_KEY";
        case Ins::ReadProfileData: return "READ_PROFILE_DATA";
        case Ins::UpdateProfileData: return "UPDATE_PROFILE_DATA";
        case Ins::Ping: return "PING";
    }
    return "UNKNOWN_INS";
}

}  // namespace esim::apdu
