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

#include "esim/crypto/kdf.hpp"

#include <array>

#include <sodium.h>

#include "esim/error.hpp"

namespace esim::crypto {

namespace {

using Digest = std::array<std::uint8_t, crypto_auth_hmacsha256_BYTES>;

Digest hmac(ByteView key, ByteView message) {
    crypto_auth_hmacsha256_state st;
    crypto_auth_hmacsha256_init(&st, key.data(), key.size());
    crypto_auth_hmacsha256_update(&st, message.data(), message.size());
    Digest out{};
    crypto_auth_hmacsha256_final(&st, out.data());
    return out;
}

}  // namespace

Bytes hkdf_sha256(ByteView salt, ByteView ikm, ByteView info, std::size_t length) {
    ensure_sodium();
    if (length > 255 * crypto_auth_hmacsha256_BYTES) throw Error(ErrorCode::OversizeData, "HKDF output too long");
    Digest zero_salt{};
    const ByteView effective_salt = salt.empty() ? ByteView(zero_salt) : salt;
    Digest prk = hmac(effective_salt, ikm);

    Bytes okm;
    Bytes block;
    for (std::uint8_t counter = 1; okm.size() < length; ++counter) {
        Bytes message = block;
        append(message, info);
        message.push_back(counter);
        auto t = hmac(prk, message);
        block.assign(t.begin(), t.end());
        append(okm, block);
    }
    okm.resize(length);
    sodium_memzero(prk.data(), prk.size());
    return okm;
}

SymmetricKey derive_key(ByteView secret, std::string_view context, KeyRole role) {
    if (secret.empty()) throw Error(ErrorCode::EmptySecret, "cannot derive from an empty secret");
    return SymmetricKey(hkdf_sha256({}, secret, to_bytes(context), kSymmetricKeySize), role);
}

}  // namespace esim::crypto
