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

#include "esim/crypto/keys.hpp"

#include <array>

#include <sodium.h>

#include "esim/error.hpp"
#include "esim/tlv.hpp"

namespace esim::crypto {

namespace {

constexpr std::uint8_t kTagSubject = 0x80;
constexpr std::uint8_t kTagScheme = 0x81;
constexpr std::uint8_t kTagKey = 0x82;
constexpr std::uint8_t kTagSignature = 0x83;

std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> expand_signing_key(const PrivateKey& sk) {
    std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk{};
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> expanded{};
    crypto_sign_seed_keypair(pk.data(), expanded.data(), sk.bytes.data());
    return expanded;
}

void check_private(const PrivateKey& sk) {
    if (sk.bytes.size() != kPrivateKeySize) throw Error(ErrorCode::InvalidKey, "private key length");
}

}  // namespace

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::KeyAgreement: return "x25519";
        case Scheme::Signature: return "ed25519";
    }
    return "unknown";
}

KeyPair generate_keypair(RandomSource& rng, Scheme scheme) {
    PrivateKey sk{scheme, rng.bytes(kPrivateKeySize)};
    return KeyPair{sk, derive_public(sk)};
}

PublicKey derive_public(const PrivateKey& sk) {
    ensure_sodium();
    check_private(sk);
    PublicKey pk{sk.scheme, Bytes(kPublicKeySize)};
    if (sk.scheme == Scheme::KeyAgreement) {
        crypto_scalarmult_base(pk.bytes.data(), sk.bytes.data());
    } else {
        std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> expanded{};
        crypto_sign_seed_keypair(pk.bytes.data(), expanded.data(), sk.bytes.data());
        sodium_memzero(expanded.data(), expanded.size());
    }
    return pk;
}

Bytes sign(const PrivateKey& sk, ByteView message) {
    if (sk.scheme != Scheme::Signature) throw Error(ErrorCode::SchemeMismatch, "signing needs an ed25519 key");
    ensure_sodium();
    check_private(sk);
    auto expanded = expand_signing_key(sk);
    Bytes sig(kSignatureSize);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), expanded.data());
    sodium_memzero(expanded.data(), expanded.size());
    return sig;
}

bool verify(const PublicKey& pk, ByteView message, ByteView signature) {
    if (pk.scheme != Scheme::Signature) throw Error(ErrorCode::SchemeMismatch, "verification needs an ed25519 key");
    ensure_sodium();
    if (pk.bytes.size() != kPublicKeySize || signature.size() != kSignatureSize) return false;
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), pk.bytes.data()) == 0;
}

Bytes agree(const PrivateKey& own, const PublicKey& peer) {
    if (own.scheme != Scheme::KeyAgreement || peer.scheme != Scheme::KeyAgreement)
        throw Error(ErrorCode::SchemeMismatch, "key agreement needs x25519 keys");
    ensure_sodium();
    check_private(own);
    if (peer.bytes.size() != kPublicKeySize) throw Error(ErrorCode::InvalidKey, "peer public key length");
    Bytes shared(crypto_scalarmult_BYTES);
    if (crypto_scalarmult(shared.data(), own.bytes.data(), peer.bytes.data()) != 0)
        throw Error(ErrorCode::InvalidKey, "low-order peer point");
    return shared;
}

Bytes Certificate::to_be_signed() const {
    Bytes out;
    tlv::put(out, kTagSubject, to_bytes(subject));
    tlv::put(out, kTagScheme, Bytes{static_cast<std::uint8_t>(subject_key.scheme)});
    tlv::put(out, kTagKey, subject_key.bytes);
    return out;
}

Bytes Certificate::serialize() const {
    Bytes out = to_be_signed();
    tlv::put(out, kTagSignature, issuer_signature);
    return out;
}

Certificate Certificate::parse(ByteView bytes) {
    std::vector<tlv::Field> fields;
    try {
        fields = tlv::parse(bytes);
    } catch (const Error&) {
        throw Error(ErrorCode::BadCertificate, "certificate encoding");
    }
    if (fields.size() != 4 || fields[0].tag != kTagSubject || fields[1].tag != kTagScheme ||
        fields[2].tag != kTagKey || fields[3].tag != kTagSignature)
        throw Error(ErrorCode::BadCertificate, "certificate structure");
    if (fields[1].value.size() != 1) throw Error(ErrorCode::BadCertificate, "scheme field");
    const auto scheme = fields[1].value[0];
    if (scheme != static_cast<std::uint8_t>(Scheme::KeyAgreement) && scheme != static_cast<std::uint8_t>(Scheme::Signature))
        throw Error(ErrorCode::BadCertificate, "unknown scheme");
    Certificate cert;
    cert.subject.assign(fields[0].value.begin(), fields[0].value.end());
    cert.subject_key = PublicKey{static_cast<Scheme>(scheme), fields[2].value};
    cert.issuer_signature = fields[3].value;
    return cert;
}

CertificateIssuer::CertificateIssuer(RandomSource& rng) : keys_(generate_keypair(rng, Scheme::Signature)) {}

Certificate CertificateIssuer::issue(std::string subject, const PublicKey& subject_key) const {
    Certificate cert{std::move(subject), subject_key, {}};
    cert.issuer_signature = sign(keys_.private_key, cert.to_be_signed());
    return cert;
}

bool verify_certificate(const Certificate& cert, const PublicKey& ci_root) {
    if (cert.subject_key.bytes.size() != kPublicKeySize) return false;
    return verify(ci_root, cert.to_be_signed(), cert.issuer_signature);
}

std::string_view key_role_name(KeyRole role) {
    switch (role) {
        case KeyRole::K80: return "k80";
        case KeyRole::ProfileCredentials: return "profile-credentials-k";
        case KeyRole::MnoSd: return "mno-sd";
    }
    return "unknown";
}

SymmetricKey::SymmetricKey(Bytes material, KeyRole role) : material_(std::move(material)), role_(role) {
    if (material_.size() != kSymmetricKeySize) throw Error(ErrorCode::InvalidKey, "symmetric key length");
}

SymmetricKey SymmetricKey::random(RandomSource& rng, KeyRole role) {
    return SymmetricKey(rng.bytes(kSymmetricKeySize), role);
}

std::string SymmetricKey::fingerprint() const { return short_digest(material_); }

}  // namespace esim::crypto
