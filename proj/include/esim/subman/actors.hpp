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

// Off-card actors. SM-SR reacts to network traffic through its handler;
// multi-party procedures (download, policy update, handover) are driven from
// procedures.hpp, which plays the SM-DP and MNO sides in sequence.

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "esim/apdu.hpp"
#include "esim/crypto/ecka.hpp"
#include "esim/crypto/keys.hpp"
#include "esim/crypto/random.hpp"
#include "esim/crypto/secure_channel.hpp"
#include "esim/network/network.hpp"
#include "esim/subman/eis.hpp"

namespace esim::subman {

struct DownloadRequest {
    Eid eid;
    std::string profile_type;
    std::string mno_id;
    std::optional<Pol1> pol1;
};

struct SmSrConfig {
    // Step-2 capability predicate: how many cards this SM-SR will manage.
    std::size_t capacity = std::numeric_limits<std::size_t>::max();
};

// Signing identity certified by the CI.
struct Credentials {
    crypto::KeyPair keys;
    crypto::Certificate certificate;
    crypto::PublicKey ci_root;
};

Credentials certify(const crypto::CertificateIssuer& ci, const std::string& subject, crypto::RandomSource& rng);

class SmSr {
public:
    SmSr(std::string id, const crypto::CertificateIssuer& ci, crypto::DeterministicRandom rng, SmSrConfig config = {});

    const std::string& id() const { return id_; }
    const Credentials& credentials() const { return credentials_; }
    crypto::DeterministicRandom& rng() { return rng_; }
    const SmSrConfig& config() const { return config_; }

    // Registry. register_eis throws Error(DuplicateEid); record and session
    // throw Error(UnknownEid).
    void register_eis(EisRecord record);
    bool holds(const Eid& eid) const { return registry_.contains(eid); }
    const EisRecord& record(const Eid& eid) const;
    EisRecord& record(const Eid& eid);
    const crypto::SecureChannelSession& session(const Eid& eid) const;
    std::vector<EisRecord> records() const;
    std::size_t size() const { return registry_.size(); }
    bool can_accept() const { return registry_.size() + incoming_.size() < config_.capacity; }

    // Handover escrow. The outgoing side parks its entry while the EIS is
    // with the new SM-SR and either forgets it (success) or takes it back.
    EisTransfer release(const Eid& eid);
    void restore(const Eid& eid, std::uint64_t send_counter, std::uint64_t recv_counter);
    void forget(const Eid& eid);
    bool escrows(const Eid& eid) const { return outgoing_.contains(eid); }

    void accept_incoming(const EisTransfer& transfer);
    // Moves the incoming entry into the registry under the new key, keeping
    // the session that proved it.
    void adopt(const Eid& eid, crypto::SecureChannelSession session);
    // Drops the incoming entry, returning its counters.
    std::pair<std::uint64_t, std::uint64_t> drop_incoming(const Eid& eid);
    bool has_incoming(const Eid& eid) const { return incoming_.contains(eid); }

    // Per-eid mutual exclusion for procedures. Throws Error(Busy).
    void lock(const Eid& eid);
    void unlock(const Eid& eid) { busy_.erase(eid); }
    bool locked(const Eid& eid) const { return busy_.contains(eid); }

    // Synchronous ISD-R exchange for procedure drivers: wraps under the
    // channel for `eid` (registry or incoming), sends and awaits the reply.
    // A reply that fails to unwrap, or arrives bare, is returned as
    // SECURITY_STATUS_NOT_SATISFIED. Throws Error(Timeout).
    apdu::ApduResponse exchange(network::Network& net, const Eid& eid, const apdu::ApduCommand& command,
                                const std::string& label, crypto::SecureChannelSession* channel = nullptr);

    void attach(network::Network& net);

    // Refreshes the EIS profile list from a GET STATUS payload, keeping the
    // owner and POL1 mirror for known ISD-Ps.
    void apply_status(const Eid& eid, ByteView status);

private:
    using Continuation = std::function<void(network::Network&, const apdu::ApduResponse&)>;

    struct Entry {
        EisRecord record;
        crypto::SecureChannelSession session;
    };
    struct Pending {
        Eid eid;
        Continuation then;
    };

    bool handle(network::Network& net, const network::Envelope& env);
    // False for messages left to a procedure driver.
    bool handle_plain(network::Network& net, const network::Envelope& env);
    void relay(network::Network& net, const network::Envelope& env);
    void call(network::Network& net, const Eid& eid, const apdu::ApduCommand& command, const std::string& label,
              network::Layer carried, Continuation then);
    void refresh_then(network::Network& net, const Eid& eid, const std::string& label,
                      std::function<void(network::Network&)> then);
    void cleanup(network::Network& net, const network::Envelope& request, const Eid& eid, std::optional<Aid> aid);
    apdu::ApduResponse open(const Eid& eid, ByteView payload, crypto::SecureChannelSession* channel);
    crypto::SecureChannelSession* channel(const Eid& eid);

    std::string id_;
    Credentials credentials_;
    crypto::DeterministicRandom rng_;
    SmSrConfig config_;
    std::map<Eid, Entry> registry_;
    std::map<Eid, Entry> outgoing_;
    std::map<Eid, Entry> incoming_;
    std::set<Eid> busy_;
    std::map<std::uint64_t, Pending> pending_;
    std::set<std::uint64_t> served_;
};

// State the SM-DP holds for one download in progress.
struct Installation {
    Aid aid;
    std::optional<crypto::EckaInitiator> ecka;
    std::optional<crypto::SecureChannelSession> channel;
};

class SmDp {
public:
    SmDp(std::string id, const crypto::CertificateIssuer& ci, crypto::DeterministicRandom rng);

    const std::string& id() const { return id_; }
    const Credentials& credentials() const { return credentials_; }
    crypto::DeterministicRandom& rng() { return rng_; }

    // Operational profile for the request: fresh MNO-SD key, POL1 from the
    // request (all rules off by default), opaque NAA parameters.
    euicc::Profile build_profile(const DownloadRequest& request);

    Installation& begin(const Eid& eid);
    Installation* installation(const Eid& eid);
    // Wipes and forgets everything held for `eid`.
    void erase(const Eid& eid);
    bool holds_no_key() const { return active_.empty(); }

    void attach(network::Network& net);

private:
    std::string id_;
    Credentials credentials_;
    crypto::DeterministicRandom rng_;
    std::map<Eid, Installation> active_;
};

struct OwnedProfile {
    Aid aid;
    crypto::SymmetricKey mno_sd_key;
    crypto::SecureChannelSession session;
};

struct Subscription {
    std::string profile_type;
    std::optional<Pol1> pol1;
};

class Mno {
public:
    explicit Mno(std::string id) : id_(std::move(id)) {}

    const std::string& id() const { return id_; }

    void subscribe(const Eid& eid, Subscription subscription) { subscriptions_[eid] = std::move(subscription); }
    const Subscription* subscription(const Eid& eid) const;

    void own(const Eid& eid, const Aid& aid, crypto::SymmetricKey mno_sd_key);
    void disown(const Eid& eid) { owned_.erase(eid); }
    OwnedProfile* owned(const Eid& eid);
    const OwnedProfile* owned(const Eid& eid) const;

    void attach(network::Network& net);

private:
    std::string id_;
    std::map<Eid, Subscription> subscriptions_;
    std::map<Eid, OwnedProfile> owned_;
};

// Registers the card's OTA endpoint on the network.
void attach_card(network::Network& net, euicc::Euicc& card);

}  // namespace esim::subman
