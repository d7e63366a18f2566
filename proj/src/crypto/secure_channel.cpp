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

#include "esim/crypto/secure_channel.hpp"

#include <array>
#include <limits>

#include <sodium.h>

#include "esim/error.hpp"

namespace esim::crypto {

namespace {

using Nonce = std::array<std::uint8_t, crypto_aead_chacha20poly1305_ietf_NPUBBYTES>;

Nonce make_nonce(ChannelRole sender, std::uint64_t counter) {
    Nonce n{};
    n[0] = static_cast<std::uint8_t>(sender);
    for (int i = 0; i < 8; ++i) n[4 + i] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
    return n;
}

Bytes make_ad(std::uint8_t version, std::uint64_t counter, ChannelRole sender, ByteView extra) {
    Bytes ad{version};
    put_u64(ad, counter);
    ad.push_back(static_cast<std::uint8_t>(sender));
    append(ad, extra);
    return ad;
}

ChannelRole opposite(ChannelRole r) {
    return r == ChannelRole::Initiator ? ChannelRole::Responder : ChannelRole::Initiator;
}

}  // namespace

Bytes SecureRecord::encode() const {
    Bytes out{version};
    put_u64(out, counter);
    append(out, ciphertext);
    return out;
}

SecureRecord SecureRecord::decode(ByteView bytes) {
    if (bytes.size() < kMinRecordSize) throw Error(ErrorCode::Truncated, "secure record too short");
    SecureRecord r;
    r.version = bytes[0];
    r.counter = get_u64(bytes.subspan(1, 8));
    r.ciphertext.assign(bytes.begin() + kRecordHeaderSize, bytes.end());
    return r;
}

bool looks_like_record(ByteView bytes) { return bytes.size() >= kMinRecordSize && bytes[0] == kRecordVersion; }

SecureChannelSession::SecureChannelSession(SymmetricKey key, ChannelRole role, std::string peer)
    : key_(std::move(key)), role_(role), peer_(std::move(peer)) {
    ensure_sodium();
}

SecureChannelSession SecureChannelSession::resume(SymmetricKey key, ChannelRole role, std::string peer,
                                                  std::uint64_t send_counter, std::uint64_t recv_counter) {
    SecureChannelSession s(std::move(key), role, std::move(peer));
    s.send_counter_ = send_counter;
    s.recv_counter_ = recv_counter;
    return s;
}

SecureRecord SecureChannelSession::wrap(ByteView plaintext, ByteView associated_data) {
    if (send_counter_ == std::numeric_limits<std::uint64_t>::max())
        throw Error(ErrorCode::CounterExhausted, "send counter exhausted");
    const std::uint64_t counter = send_counter_ + 1;
    const auto nonce = make_nonce(role_, counter);
    const auto ad = make_ad(kRecordVersion, counter, role_, associated_data);

    SecureRecord record{kRecordVersion, counter, Bytes(plaintext.size() + kRecordTagSize)};
    unsigned long long written = 0;
    crypto_aead_chacha20poly1305_ietf_encrypt(record.ciphertext.data(), &written, plaintext.data(), plaintext.size(),
                                              ad.data(), ad.size(), nullptr, nonce.data(), key_.material().data());
    record.ciphertext.resize(written);
    send_counter_ = counter;
    return record;
}

Bytes SecureChannelSession::unwrap(const SecureRecord& record, ByteView associated_data) {
    if (record.version != kRecordVersion || record.ciphertext.size() < kRecordTagSize)
        throw Error(ErrorCode::TamperDetected, "malformed secure record");
    const auto sender = opposite(role_);
    const auto nonce = make_nonce(sender, record.counter);
    const auto ad = make_ad(record.version, record.counter, sender, associated_data);

    Bytes plaintext(record.ciphertext.size() - kRecordTagSize);
    unsigned long long written = 0;
    if (crypto_aead_chacha20poly1305_ietf_decrypt(plaintext.data(), &written, nullptr, record.ciphertext.data(),
                                                  record.ciphertext.size(), ad.data(), ad.size(), nonce.data(),
                                                  key_.material().data()) != 0)
        throw Error(ErrorCode::TamperDetected, "record failed authentication");
    if (record.counter <= recv_counter_) throw Error(ErrorCode::ReplayDetected, "record counter not fresh");
    recv_counter_ = record.counter;
    plaintext.resize(written);
    return plaintext;
}

Bytes SecureChannelSession::unwrap_bytes(ByteView bytes, ByteView associated_data) {
    SecureRecord record;
    try {
        record = SecureRecord::decode(bytes);
    } catch (const Error&) {
        throw Error(ErrorCode::TamperDetected, "truncated secure record");
    }
    return unwrap(record, associated_data);
}

}  // namespace esim::crypto
