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

#include "esim/error.hpp"
#include "esim/subman/actors.hpp"

namespace esim::subman {

SmDp::SmDp(std::string id, const crypto::CertificateIssuer& ci, crypto::DeterministicRandom rng)
    : id_(std::move(id)), credentials_(certify(ci, "smdp:" + id_, rng)), rng_(std::move(rng)) {}

euicc::Profile SmDp::build_profile(const DownloadRequest& request) {
    Bytes naa = to_bytes("naa:" + request.profile_type + ":");
    append(naa, rng_.bytes(16));
    return euicc::Profile{request.mno_id,
                          euicc::ProfileKind::Operational,
                          policy::ProfileState::Disabled,
                          request.pol1.value_or(Pol1{}),
                          false,
                          crypto::SymmetricKey::random(rng_, crypto::KeyRole::MnoSd),
                          std::move(naa)};
}

Installation& SmDp::begin(const Eid& eid) {
    erase(eid);
    return active_[eid];
}

Installation* SmDp::installation(const Eid& eid) {
    auto it = active_.find(eid);
    return it == active_.end() ? nullptr : &it->second;
}

void SmDp::erase(const Eid& eid) {
    auto it = active_.find(eid);
    if (it == active_.end()) return;
    if (it->second.ecka) it->second.ecka->wipe();
    active_.erase(it);
}

void SmDp::attach(network::Network& net) { net.register_actor(id_, network::ActorKind::SmDp); }

const Subscription* Mno::subscription(const Eid& eid) const {
    auto it = subscriptions_.find(eid);
    return it == subscriptions_.end() ? nullptr : &it->second;
}

void Mno::own(const Eid& eid, const Aid& aid, crypto::SymmetricKey mno_sd_key) {
    crypto::SecureChannelSession session(mno_sd_key, crypto::ChannelRole::Initiator, "mno-sd:" + to_hex(aid));
    owned_.insert_or_assign(eid, OwnedProfile{aid, std::move(mno_sd_key), std::move(session)});
}

OwnedProfile* Mno::owned(const Eid& eid) {
    auto it = owned_.find(eid);
    return it == owned_.end() ? nullptr : &it->second;
}

const OwnedProfile* Mno::owned(const Eid& eid) const {
    auto it = owned_.find(eid);
    return it == owned_.end() ? nullptr : &it->second;
}

void Mno::attach(network::Network& net) { net.register_actor(id_, network::ActorKind::Mno); }

void attach_card(network::Network& net, euicc::Euicc& card) {
    net.register_actor(network::card_address(card.eid().hex()), network::ActorKind::Card,
                       [&card](network::Network& n, const network::Envelope& env) {
                           n.reply(env, network::Layer::OtaIsdr, card.handle_ota(env.payload), env.carried);
                           return true;
                       });
}

}  // namespace esim::subman
