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

#include <string_view>

#include "esim/bytes.hpp"
#include "esim/crypto/keys.hpp"

namespace esim::crypto {

inline constexpr std::string_view kProfileCredentialsContext = "esim/profile-management-credentials/v1";
inline constexpr std::string_view kSmsrKeyContext = "esim/smsr-k80/v1";

// RFC 5869 HKDF with HMAC-SHA256. An empty salt means HashLen zero octets.
Bytes hkdf_sha256(ByteView salt, ByteView ikm, ByteView info, std::size_t length);

// k = HKDF-SHA256(salt = none, ikm = secret, info = context), 32 octets.
// Throws Error(EmptySecret) for an empty secret.
SymmetricKey derive_key(ByteView secret, std::string_view context, KeyRole role = KeyRole::ProfileCredentials);

}  // namespace esim::crypto
