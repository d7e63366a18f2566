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

#include "esim/crypto/ecka.hpp"

#include <sodium.h>

#include "esim/crypto/kdf.hpp"
#include "esim/error.hpp"

namespace esim::crypto {

namespace {

void scrub(std::optional<Bytes>& secret) {
    if (secret) sodium_memzero(secret->data(), secret->size());
    secret.reset();
}

}  // namespace

std::string_view ecka_step_name(EckaStep step) {
    switch (step) {
        case EckaStep::Certificate: return "certificate";
        case EckaStep::Challenge: return "challenge";
        case EckaStep::Offer: return "offer";
    }
    return "unknown";
}

Bytes EckaOffer::encode() const {
    Bytes out = ephemeral.bytes;
    append(out, challenge);
    append(out, signature);
    return out;
}

EckaOffer EckaOffer::decode(ByteView bytes) {
    if (bytes.size() != kOfferSize) throw Error(ErrorCode::BadSignature, "offer has wrong length");
    EckaOffer offer;
    offer.ephemeral = PublicKey{Scheme::KeyAgreement, Bytes(bytes.begin(), bytes.begin() + kPublicKeySize)};
    offer.challenge.assign(bytes.begin() + kPublicKeySize, bytes.begin() + kPublicKeySize + kChallengeSize);
    offer.signature.assign(bytes.begin() + kPublicKeySize + kChallengeSize, bytes.end());
    return offer;
}

Bytes offer_signed_payload(ByteView challenge, const PublicKey& ephemeral) {
    Bytes msg(challenge.begin(), challenge.end());
    append(msg, ephemeral.bytes);
    return msg;
}

EckaResponder::EckaResponder(KeyPair static_keys, PublicKey ci_root, std::string context, KeyRole role)
    : static_keys_(std::move(static_keys)), ci_root_(std::move(ci_root)), context_(std::move(context)), role_(role) {}

Bytes EckaResponder::on_certificate(ByteView certificate, RandomSource& rng) {
    wipe();
    const auto cert = Certificate::parse(certificate);
    if (cert.subject_key.scheme != Scheme::Signature || !verify_certificate(cert, ci_root_))
        throw Error(ErrorCode::BadCertificate, "initiator certificate does not verify under the CI root");
    peer_ = cert;
    challenge_ = rng.bytes(kChallengeSize);
    return *challenge_;
}

SymmetricKey EckaResponder::on_offer(ByteView bytes) {
    if (!challenge_ || !peer_) {
        wipe();
        throw Error(ErrorCode::StaleChallenge, "no outstanding challenge");
    }
    const Bytes expected = *challenge_;
    const Certificate peer = *peer_;
    wipe();  // single use from here on

    const auto offer = EckaOffer::decode(bytes);
    if (!secure_equal(offer.challenge, expected))
        throw Error(ErrorCode::ChallengeMismatch, "offer does not echo the outstanding challenge");
    if (!verify(peer.subject_key, offer_signed_payload(offer.challenge, offer.ephemeral), offer.signature))
        throw Error(ErrorCode::BadSignature, "offer signature invalid");

    Bytes s = agree(static_keys_.private_key, offer.ephemeral);
    auto k = derive_key(s, context_, role_);
    secret_ = std::move(s);
    return k;
}

void EckaResponder::wipe() {
    scrub(secret_);
    challenge_.reset();
    peer_.reset();
}

EckaInitiator::EckaInitiator(KeyPair signing_keys, Certificate own_certificate, PublicKey ci_root,
                             Certificate card_certificate, std::string context, KeyRole role)
    : signing_keys_(std::move(signing_keys)),
      own_certificate_(std::move(own_certificate)),
      context_(std::move(context)),
      role_(role) {
    if (card_certificate.subject_key.scheme != Scheme::KeyAgreement || !verify_certificate(card_certificate, ci_root))
        throw Error(ErrorCode::BadCertificate, "card certificate does not verify under the CI root");
    card_key_ = card_certificate.subject_key;
}

Bytes EckaInitiator::on_challenge(ByteView challenge, RandomSource& rng) {
    wipe();
    if (challenge.size() != kChallengeSize) throw Error(ErrorCode::ChallengeMismatch, "challenge has wrong length");
    auto ephemeral = generate_keypair(rng, Scheme::KeyAgreement);
    EckaOffer offer{ephemeral.public_key, Bytes(challenge.begin(), challenge.end()), {}};
    offer.signature = sign(signing_keys_.private_key, offer_signed_payload(offer.challenge, offer.ephemeral));

    Bytes s = agree(ephemeral.private_key, card_key_);
    sodium_memzero(ephemeral.private_key.bytes.data(), ephemeral.private_key.bytes.size());
    key_ = derive_key(s, context_, role_);
    secret_ = std::move(s);
    return offer.encode();
}

void EckaInitiator::wipe() {
    scrub(secret_);
    key_.reset();
}

Bytes TranscriptChannel::carry(EckaStep step, Bytes message) {
    entries_.push_back(TranscriptEntry{step, message});
    return deliver(step, std::move(message));
}

Bytes TranscriptChannel::concatenated() const {
    Bytes out;
    for (const auto& e : entries_) append(out, e.message);
    return out;
}

EckaKeys ecka_run(EckaInitiator& initiator, EckaResponder& responder, TranscriptChannel& channel,
                  RandomSource& initiator_rng, RandomSource& responder_rng) {
    try {
        auto cert = channel.carry(EckaStep::Certificate, initiator.hello());
        auto challenge = channel.carry(EckaStep::Challenge, responder.on_certificate(cert, responder_rng));
        auto offer = channel.carry(EckaStep::Offer, initiator.on_challenge(challenge, initiator_rng));
        auto k_card = responder.on_offer(offer);
        return EckaKeys{*initiator.key(), std::move(k_card)};
    } catch (...) {
        initiator.wipe();
        responder.wipe();
        throw;
    }
}

}  // namespace esim::crypto
