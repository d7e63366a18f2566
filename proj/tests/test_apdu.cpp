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

#include <gtest/gtest.h>

#include "esim/apdu.hpp"
#include "esim/error.hpp"
#include "esim/tlv.hpp"
#include "support/apdu_gen.hpp"

using namespace esim;
using apdu::ApduCommand;

namespace {

ApduCommand cmd(Bytes data, std::optional<std::uint32_t> le) {
    return ApduCommand{0x80, 0xCA, 0x01, 0x02, std::move(data), le};
}

ErrorCode decode_error(const Bytes& b) {
    try {
        apdu::decode_command(b);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "decoded " << to_hex(b);
    return ErrorCode::WrongData;
}

}  // namespace

TEST(ApduEncode, ShortCases) {
    EXPECT_EQ(to_hex(apdu::encode_command(cmd({}, std::nullopt))), "80ca0102");
    EXPECT_EQ(to_hex(apdu::encode_command(cmd({}, 16))), "80ca010210");
    EXPECT_EQ(to_hex(apdu::encode_command(cmd({}, 256))), "80ca010200");
    EXPECT_EQ(to_hex(apdu::encode_command(cmd({0xAA, 0xBB}, std::nullopt))), "80ca010202aabb");
    EXPECT_EQ(to_hex(apdu::encode_command(cmd({0xAA}, 256))), "80ca010201aa00");
    EXPECT_EQ(apdu::encode_command(cmd(Bytes(255, 0x11), std::nullopt)).size(), 4u + 1 + 255);
}

TEST(ApduEncode, ExtendedCases) {
    EXPECT_EQ(to_hex(apdu::encode_command(cmd({}, 257))), "80ca0102000101");
    EXPECT_EQ(to_hex(apdu::encode_command(cmd({}, 65536))), "80ca0102000000");
    // Data fits short form but Le does not: both lengths go extended.
    EXPECT_EQ(to_hex(apdu::encode_command(cmd({0xAA}, 300))), "80ca010200" "0001" "aa" "012c");
}

TEST(ApduEncode, ThreeHundredOctetsExtended) {
    Bytes data(300);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::uint8_t>(i);
    const auto out = apdu::encode_command(cmd(data, std::nullopt));
    ASSERT_EQ(out.size(), 307u);
    EXPECT_EQ(to_hex(ByteView(out).first(10)), "80ca010200012c000102");
    EXPECT_EQ(out.back(), 0x2B);  // 299 mod 256

    const auto with_le = apdu::encode_command(cmd(data, 1));
    ASSERT_EQ(with_le.size(), 309u);
    EXPECT_EQ(to_hex(ByteView(with_le).last(3)), "2b0001");
    EXPECT_EQ(apdu::decode_command(with_le), cmd(data, 1));
}

TEST(ApduEncode, RejectsOutOfRange) {
    EXPECT_THROW(apdu::encode_command(cmd(Bytes(apdu::kMaxData + 1), std::nullopt)), Error);
    EXPECT_THROW(apdu::encode_command(cmd({}, 0)), Error);
    EXPECT_THROW(apdu::encode_command(cmd({}, 65537)), Error);
    EXPECT_NO_THROW(apdu::encode_command(cmd(Bytes(apdu::kMaxData), 65536)));
}

TEST(ApduDecode, RejectsNonCanonical) {
    EXPECT_EQ(decode_error(from_hex("80ca0102000005")), ErrorCode::MalformedLength);      // extended Le 5
    EXPECT_EQ(decode_error(from_hex("80ca0102000003aabbcc")), ErrorCode::MalformedLength); // extended Lc 3
    EXPECT_EQ(decode_error(from_hex("80ca010200000001")), ErrorCode::MalformedLength);     // extended Lc 0
    EXPECT_EQ(decode_error(from_hex("80ca010200000100")), ErrorCode::MalformedLength);
    EXPECT_EQ(decode_error(from_hex("80ca010202aabb0011")), ErrorCode::MalformedLength);   // trailing octets
}

TEST(ApduDecode, RejectsTruncated) {
    EXPECT_EQ(decode_error(from_hex("80ca01")), ErrorCode::Truncated);
    EXPECT_EQ(decode_error(from_hex("80ca010203aabb")), ErrorCode::Truncated);
    EXPECT_EQ(decode_error(from_hex("80ca01020001")), ErrorCode::Truncated);
    EXPECT_EQ(decode_error(from_hex("80ca010200012caa")), ErrorCode::Truncated);
}

TEST(ApduDecode, LeEncodings) {
    EXPECT_EQ(apdu::decode_command(from_hex("80ca010200")).le, 256u);
    EXPECT_EQ(apdu::decode_command(from_hex("80ca0102000000")).le, 65536u);
    EXPECT_EQ(apdu::decode_command(from_hex("80ca010201aa00")).le, 256u);
}

TEST(ApduProperty, MatchesReferenceEncoderAndRoundTrips) {
    std::mt19937_64 g(0x5eed);
    for (int i = 0; i < 2000; ++i) {
        const auto c = fixture::random_command(g);
        const auto bytes = apdu::encode_command(c);
        ASSERT_EQ(bytes, fixture::reference_encode(c));
        ASSERT_EQ(apdu::decode_command(bytes), c);
    }
}

TEST(ApduProperty, ArbitraryInputNeverEscapesTyped) {
    std::mt19937_64 g(0xfeed);
    for (int i = 0; i < 2000; ++i) {
        const auto b = fixture::random_octets(g);
        try {
            const auto c = apdu::decode_command(b);
            ASSERT_EQ(apdu::encode_command(c), b) << "accepted a non-canonical encoding";
        } catch (const Error&) {
        }
        try {
            const auto r = apdu::decode_response(b);
            ASSERT_EQ(apdu::encode_response(r), b);
        } catch (const Error&) {
        }
    }
}

TEST(ApduResponse, RoundTripAndUnknownStatus) {
    const apdu::ApduResponse r{{0x01, 0x02}, apdu::StatusWord::ConditionsNotSatisfied};
    EXPECT_EQ(to_hex(apdu::encode_response(r)), "01026985");
    EXPECT_EQ(apdu::decode_response(apdu::encode_response(r)), r);
    EXPECT_EQ(apdu::decode_response(from_hex("9000")).status, apdu::StatusWord::Success);
    EXPECT_THROW(apdu::decode_response(from_hex("6f00")), Error);
    EXPECT_THROW(apdu::decode_response(from_hex("90")), Error);
}

TEST(ApduNames, StatusTable) {
    EXPECT_EQ(apdu::status_name(apdu::StatusWord::SecurityStatusNotSatisfied), "SECURITY_STATUS_NOT_SATISFIED");
    EXPECT_EQ(apdu::status_from_name("WRONG_DATA"), apdu::StatusWord::WrongData);
    EXPECT_FALSE(apdu::status_from_name("wrong_data"));
    EXPECT_EQ(apdu::ins_name(0xE6), "CREATE_ISDP");
}

TEST(Tlv, LengthForms) {
    Bytes out;
    tlv::put(out, 0x4F, Bytes(3, 0xAA));
    tlv::put(out, 0x70, Bytes(0x80, 0x00));
    tlv::put(out, 0x71, Bytes(0x100, 0x00));
    EXPECT_EQ(to_hex(ByteView(out).first(5)), "4f03aaaaaa");
    EXPECT_EQ(out[5], 0x70);
    EXPECT_EQ(to_hex(ByteView(out).subspan(6, 2)), "8180");
    EXPECT_EQ(to_hex(ByteView(out).subspan(8 + 0x80, 4)), "71820100");
    const auto fields = tlv::parse(out);
    ASSERT_EQ(fields.size(), 3u);
    EXPECT_EQ(fields[2].value.size(), 0x100u);
    EXPECT_THROW(tlv::parse(from_hex("4f05aa")), Error);
    EXPECT_THROW(tlv::require(fields, 0x99), Error);
}
