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

// Asymmetric keys, signatures, certificates and symmetric keys.
//
// Schemes are pinned: X25519 for key agreement, Ed25519 for signatures,
// HKDF-SHA256 for derivation and ChaCha20-Poly1305 (IETF) for the channel.
// Changing any of these changes every golden trace.

#include <cstdint>
#include <string>
#include <string_view>

#include "esim/bytes.hpp"
#include "esim/crypto/random.hpp"

namespace esim::crypto {

enum class Scheme : std::uint8_t {
    KeyAgreement = 0x01,  // X25519
    Signature = 0x02,     // Ed25519
};

std::string_view scheme_name(Scheme s);

inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kPrivateKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kSymmetricKeySize = 32;

struct PublicKey {
    Scheme scheme = Scheme::KeyAgreement;
    Bytes bytes;

    bool operator==(const PublicKey&) const = default;
};

// For both schemes the private key is the 32-octet seed; the public half is
// recomputed from it on demand.
struct PrivateKey {
    Scheme scheme = Scheme::KeyAgreement;
    Bytes bytes;

    bool operator==(const PrivateKey&) const = default;
};

struct KeyPair {
    PrivateKey private_key;
    PublicKey public_key;

    bool operator==(const KeyPair&) const = default;
};

KeyPair generate_keypair(RandomSource& rng, Scheme scheme);
PublicKey derive_public(const PrivateKey& sk);

Bytes sign(const PrivateKey& sk, ByteView message);
bool verify(const PublicKey& pk, ByteView message, ByteView signature);

// X25519 shared secret. Throws Error(SchemeMismatch) for non key-agreement
// keys and Error(InvalidKey) for low-order peer points.
Bytes agree(const PrivateKey& own, const PublicKey& peer);

struct Certificate {
    std::string subject;
    PublicKey subject_key;
    Bytes issuer_signature;

    Bytes to_be_signed() const;
    Bytes serialize() const;
    // Throws Error(BadCertificate) on malformed input.
    static Certificate parse(ByteView bytes);

    bool operator==(const Certificate&) const = default;
};

// Certificate Issuer: the single root of trust. Signs leaf certificates only.
class CertificateIssuer {
public:
    explicit CertificateIssuer(RandomSource& rng);

    const PublicKey& root() const { return keys_.public_key; }
    Certificate issue(std::string subject, const PublicKey& subject_key) const;

private:
    KeyPair keys_;
};

bool verify_certificate(const Certificate& cert, const PublicKey& ci_root);

enum class KeyRole : std::uint8_t {
    K80 = 1,                  // ISD-R <-> SM-SR channel key
    ProfileCredentials = 2,   // k, derived by ECKA for one installation
    MnoSd = 3,                // MNO <-> MNO-SD channel key inside a profile
};

std::string_view key_role_name(KeyRole role);

class SymmetricKey {
public:
    // Throws Error(InvalidKey) unless material is exactly kSymmetricKeySize octets.
    SymmetricKey(Bytes material, KeyRole role);

    static SymmetricKey random(RandomSource& rng, KeyRole role);

    const Bytes& material() const { return material_; }
    KeyRole role() const { return role_; }
    std::string fingerprint() const;

    bool operator==(const SymmetricKey& other) const {
        return role_ == other.role_ && secure_equal(material_, other.material_);
    }

private:
    Bytes material_;
    KeyRole role_;
};

}  // namespace esim::crypto
