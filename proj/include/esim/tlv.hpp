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

// Single-octet-tag TLV used for command payloads. Lengths use the BER
// definite forms: one octet below 0x80, 0x81 xx, or 0x82 xx xx.
//
// Payload layouts (tags):
//   4F  ISD-P application identifier
//   21  serialized certificate
//   85  ECKA challenge
//   86  ephemeral public key
//   37  signature
//   87  ECKA offer (ephemeral key, challenge, signature)
//   70  secure record (install channel, key k)
//   71  secure record (MNO-SD channel)
//   01  flag octet
//   E3  GET STATUS entry: 4F aid, 80 ISD-P state, 81 profile state,
//       82 fallback, 83 profile kind

#include <cstdint>
#include <optional>
#include <vector>

#include "esim/bytes.hpp"

namespace esim::tlv {

struct Field {
    std::uint8_t tag;
    Bytes value;

    bool operator==(const Field&) const = default;
};

void put(Bytes& out, std::uint8_t tag, ByteView value);

Bytes encode(const std::vector<Field>& fields);

// Parses a flat sequence. Throws Error(Truncated) or Error(MalformedLength).
std::vector<Field> parse(ByteView in);

std::optional<Bytes> find(const std::vector<Field>& fields, std::uint8_t tag);

// Like find, but throws Error(WrongData) when absent.
Bytes require(const std::vector<Field>& fields, std::uint8_t tag);

}  // namespace esim::tlv
