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

#include "esim/tlv.hpp"

#include "esim/error.hpp"

namespace esim::tlv {

void put(Bytes& out, std::uint8_t tag, ByteView value) {
    out.push_back(tag);
    const auto n = value.size();
    if (n < 0x80) {
        out.push_back(static_cast<std::uint8_t>(n));
    } else if (n <= 0xFF) {
        out.push_back(0x81);
        out.push_back(static_cast<std::uint8_t>(n));
    } else if (n <= 0xFFFF) {
        out.push_back(0x82);
        put_u16(out, static_cast<std::uint16_t>(n));
    } else {
        throw Error(ErrorCode::OversizeData, "TLV value exceeds 65535 octets");
    }
    append(out, value);
}

Bytes encode(const std::vector<Field>& fields) {
    Bytes out;
    for (const auto& f : fields) put(out, f.tag, f.value);
    return out;
}

std::vector<Field> parse(ByteView in) {
    std::vector<Field> fields;
    std::size_t pos = 0;
    while (pos < in.size()) {
        if (in.size() - pos < 2) throw Error(ErrorCode::Truncated, "TLV header");
        const std::uint8_t tag = in[pos++];
        std::size_t len = in[pos++];
        if (len == 0x81) {
            if (pos + 1 > in.size()) throw Error(ErrorCode::Truncated, "TLV length");
            len = in[pos++];
            if (len < 0x80) throw Error(ErrorCode::MalformedLength, "non-minimal TLV length");
        } else if (len == 0x82) {
            if (pos + 2 > in.size()) throw Error(ErrorCode::Truncated, "TLV length");
            len = (static_cast<std::size_t>(in[pos]) << 8) | in[pos + 1];
            pos += 2;
            if (len <= 0xFF) throw Error(ErrorCode::MalformedLength, "non-minimal TLV length");
        } else if (len >= 0x80) {
            throw Error(ErrorCode::MalformedLength, "unsupported TLV length form");
        }
        if (len > in.size() - pos) throw Error(ErrorCode::Truncated, "TLV value");
        fields.push_back(Field{tag, Bytes(in.begin() + static_cast<std::ptrdiff_t>(pos),
                                          in.begin() + static_cast<std::ptrdiff_t>(pos + len))});
        pos += len;
    }
    return fields;
}

std::optional<Bytes> find(const std::vector<Field>& fields, std::uint8_t tag) {
    for (const auto& f : fields)
        if (f.tag == tag) return f.value;
    return std::nullopt;
}

Bytes require(const std::vector<Field>& fields, std::uint8_t tag) {
    auto v = find(fields, tag);
    if (!v) throw Error(ErrorCode::WrongData, "missing TLV field");
    return *v;
}

}  // namespace esim::tlv
