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

// Elliptic-curve key agreement (ElGamal style) used to derive the Profile
// Management Credentials between an SM-DP and a card, and reused with a new
// SM-SR as peer to establish a replacement k80.
//
//   (a) initiator takes the card's certified public key from the EIS and
//       checks it against the CI root
//   (b) initiator -> card : initiator certificate
//   (c) card -> initiator : 16-octet random challenge
//   (d) initiator -> card : ephemeral public key || challenge || signature,
//       signature = Sign(initiator static key, challenge || ephemeral key)
//   (e) both sides: s = X25519(ephemeral, card static), k = HKDF(s, context)
//
// Any verification failure wipes the challenge, peer certificate and secret
// on the failing side.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "esim/bytes.hpp"
#include "esim/crypto/keys.hpp"
#include "esim/crypto/random.hpp"

namespace esim::crypto {

inline constexpr std::size_t kChallengeSize = 16;
inline constexpr std::size_t kOfferSize = kPublicKeySize + kChallengeSize + kSignatureSize;

enum class EckaStep : std::uint8_t { Certificate, Challenge, Offer };

std::string_view ecka_step_name(EckaStep step);

// Step (d) message, fixed layout: ephemeral(32) || challenge(16) || signature(64).
struct EckaOffer {
    PublicKey ephemeral;
    Bytes challenge;
    Bytes signature;

    Bytes encode() const;
    // Wrong length yields Error(BadSignature): the message cannot be authentic.
    static EckaOffer decode(ByteView bytes);
};

Bytes offer_signed_payload(ByteView challenge, const PublicKey& ephemeral);

// Card side, backed by the ECASD key pair.
class EckaResponder {
public:
    EckaResponder(KeyPair static_keys, PublicKey ci_root, std::string context, KeyRole role);

    // (b) -> (c). Verifies the initiator certificate and issues a fresh
    // challenge, replacing any outstanding one.
    Bytes on_certificate(ByteView certificate, RandomSource& rng);

    // (d) -> (e). Consumes the outstanding challenge whether or not the offer
    // is accepted.
    SymmetricKey on_offer(ByteView offer);

    bool awaiting_offer() const { return challenge_.has_value(); }
    bool holds_secret() const { return secret_.has_value(); }
    const std::optional<Bytes>& secret() const { return secret_; }
    const std::optional<Certificate>& peer() const { return peer_; }

    void wipe();

private:
    KeyPair static_keys_;
    PublicKey ci_root_;
    std::string context_;
    KeyRole role_;
    std::optional<Certificate> peer_;
    std::optional<Bytes> challenge_;
    std::optional<Bytes> secret_;
};

// SM-DP / new SM-SR side.
class EckaInitiator {
public:
    // Step (a): throws Error(BadCertificate) unless `card_certificate`
    // verifies under `ci_root` and carries a key-agreement key.
    EckaInitiator(KeyPair signing_keys, Certificate own_certificate, PublicKey ci_root, Certificate card_certificate,
                  std::string context, KeyRole role);

    Bytes hello() const { return own_certificate_.serialize(); }

    // (c) -> (d). Generates the ephemeral pair, signs, and derives k.
    Bytes on_challenge(ByteView challenge, RandomSource& rng);

    bool holds_secret() const { return secret_.has_value(); }
    const std::optional<Bytes>& secret() const { return secret_; }
    const std::optional<SymmetricKey>& key() const { return key_; }

    void wipe();

private:
    KeyPair signing_keys_;
    Certificate own_certificate_;
    PublicKey card_key_;
    std::string context_;
    KeyRole role_;
    std::optional<Bytes> secret_;
    std::optional<SymmetricKey> key_;
};

struct TranscriptEntry {
    EckaStep step;
    Bytes message;
};

// Carries protocol messages between the parties. Subclasses may mutate,
// replace or record what is delivered.
class TranscriptChannel {
public:
    virtual ~TranscriptChannel() = default;

    Bytes carry(EckaStep step, Bytes message);

    const std::vector<TranscriptEntry>& entries() const { return entries_; }
    Bytes concatenated() const;

protected:
    virtual Bytes deliver(EckaStep, Bytes message) { return message; }

private:
    std::vector<TranscriptEntry> entries_;
};

// Mutates one in-flight message through a callback.
class TamperingChannel : public TranscriptChannel {
public:
    explicit TamperingChannel(std::function<void(EckaStep, Bytes&)> mutate) : mutate_(std::move(mutate)) {}

protected:
    Bytes deliver(EckaStep step, Bytes message) override {
        mutate_(step, message);
        return message;
    }

private:
    std::function<void(EckaStep, Bytes&)> mutate_;
};

struct EckaKeys {
    SymmetricKey initiator;
    SymmetricKey responder;
};

// Runs (b)-(e) end to end. On any failure both parties are wiped and the
// error is rethrown.
EckaKeys ecka_run(EckaInitiator& initiator, EckaResponder& responder, TranscriptChannel& channel,
                  RandomSource& initiator_rng, RandomSource& responder_rng);

}  // namespace esim::crypto
