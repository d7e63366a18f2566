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

// Symmetric secure channel with the confidentiality, integrity and
// anti-replay contract of SCP80 (not its packet format).
//
// Record wire layout:
//
//   +---------+----------------------+-----------------------------+
//   | version | counter (8, BE)      | ciphertext || 16-octet tag  |
//   +---------+----------------------+-----------------------------+
//
// AEAD is ChaCha20-Poly1305 (IETF). The nonce is the sender's direction octet
// followed by three zero octets and the counter, so the two directions of a
// session never share a nonce. Authenticated data is
// version || counter || direction || caller associated data.

#include <cstdint>
#include <string>

#include "esim/bytes.hpp"
#include "esim/crypto/keys.hpp"

namespace esim::crypto {

inline constexpr std::uint8_t kRecordVersion = 0x01;
inline constexpr std::size_t kRecordHeaderSize = 9;
inline constexpr std::size_t kRecordTagSize = 16;
inline constexpr std::size_t kMinRecordSize = kRecordHeaderSize + kRecordTagSize;

struct SecureRecord {
    std::uint8_t version = kRecordVersion;
    std::uint64_t counter = 0;
    Bytes ciphertext;  // includes the tag

    Bytes encode() const;
    // Throws Error(Truncated) when shorter than header + tag.
    static SecureRecord decode(ByteView bytes);

    bool operator==(const SecureRecord&) const = default;
};

// True when `bytes` has the shape of a record (version and minimum length).
bool looks_like_record(ByteView bytes);

enum class ChannelRole : std::uint8_t {
    Initiator = 0x49,  // off-card end
    Responder = 0x52,  // on-card end
};

// One end of a channel. Single owner: counters must not be advanced from two
// contexts at once.
class SecureChannelSession {
public:
    SecureChannelSession(SymmetricKey key, ChannelRole role, std::string peer);

    // Rebuilds a session mid-stream, e.g. when an SM-SR hands over its channel state.
    static SecureChannelSession resume(SymmetricKey key, ChannelRole role, std::string peer,
                                       std::uint64_t send_counter, std::uint64_t recv_counter);

    // Increments the send counter. Throws Error(CounterExhausted) when the
    // counter space is used up.
    SecureRecord wrap(ByteView plaintext, ByteView associated_data = {});
    Bytes wrap_bytes(ByteView plaintext, ByteView associated_data = {}) { return wrap(plaintext, associated_data).encode(); }

    // Authenticates first, then enforces counter > last accepted. Throws
    // Error(TamperDetected) or Error(ReplayDetected); state is untouched on error.
    Bytes unwrap(const SecureRecord& record, ByteView associated_data = {});
    Bytes unwrap_bytes(ByteView record, ByteView associated_data = {});

    const SymmetricKey& key() const { return key_; }
    ChannelRole role() const { return role_; }
    const std::string& peer() const { return peer_; }
    std::uint64_t send_counter() const { return send_counter_; }
    std::uint64_t recv_counter() const { return recv_counter_; }

private:
    SymmetricKey key_;
    ChannelRole role_;
    std::string peer_;
    std::uint64_t send_counter_ = 0;
    std::uint64_t recv_counter_ = 0;
};

}  // namespace esim::crypto
