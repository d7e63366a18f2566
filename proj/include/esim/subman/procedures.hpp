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

// Multi-party procedures. Each call runs the network until the procedure
// completes or fails; every message goes through `net` and is traced with a
// "<procedure>:<step>" label that fault rules can match.

#include <string>

#include "esim/apdu.hpp"
#include "esim/network/network.hpp"
#include "esim/subman/actors.hpp"

namespace esim::subman {

// Direct registration. Throws Error(DuplicateEid).
void smsr_register(SmSr& smsr, EisRecord eis);

// Registration as the EUM would do it: the EIS travels to the SM-SR over the
// network, then a PING over k80 confirms the channel.
void register_eis(network::Network& net, const std::string& eum, SmSr& smsr, const EisRecord& eis);

euicc::Profile smdp_build_profile(SmDp& smdp, const DownloadRequest& request);

// Seven steps:
//   1 MNO -> SM-DP       DownloadProfile
//   2 SM-DP              builds the profile
//   3 SM-DP -> SM-SR     create ISD-P (relayed to the card)
//   4 SM-DP <-> card     ECKA over the relay, k derived on both sides
//   5 SM-DP -> ISD-P     secure channel under k opened
//   6 SM-DP -> ISD-P     profile transferred; the SM-DP erases k
//   7 SM-DP -> SM-SR     installation reported, MNO gets the MNO-SD key
// Any failure runs a cleanup through the SM-SR that deletes the ISD-P it
// created, then throws IsdpCreationFailed, KeyAgreementFailed or
// InstallRejected according to the failing step. Throws Error(UnknownEid)
// before sending anything when the SM-SR does not hold the card.
Aid download_profile(network::Network& net, Mno& mno, SmDp& smdp, SmSr& smsr, const DownloadRequest& request);

// Updates the EIS mirror first, then the card's POL1 through the MNO-SD
// channel. A card refusal reverts the mirror and is rethrown (NotEnabled,
// SecurityStatus, ...).
void mno_update_policy(network::Network& net, Mno& mno, SmSr& smsr, const Eid& eid, const Pol1& rules);

// Seven steps:
//   1 MNO -> new SM-SR   notice of the incoming change
//   2 new SM-SR -> MNO   capability answer (capacity predicate)
//   3 MNO -> old SM-SR   start
//   4 old -> new SM-SR   EIS and ISD-R channel counters handed over
//   5 new SM-SR <-> card ECKA for a new k80, under the old k80
//   6 new SM-SR -> card  commit: the card retires the old k80
//   7 new -> old SM-SR   completion; the old SM-SR deletes its copy
// Throws CapabilityRefused (nothing changed), EstablishmentFailed (the old
// SM-SR keeps the card and the card its key) or Timeout before step 4.
void smsr_change(network::Network& net, Mno& mno, SmSr& old_smsr, SmSr& new_smsr, const Eid& eid);

enum class ProfileOp : std::uint8_t { Enable, Disable, Delete, SetFallback, ClearFallback };

std::string_view profile_op_name(ProfileOp op);

// Asks the SM-SR to run an ISD-R command on the card. Returns the card's
// status word. Throws Error(Timeout) when no answer arrives.
apdu::StatusWord profile_command(network::Network& net, const Mno& requester, SmSr& smsr, const Eid& eid,
                                 ProfileOp op, const Aid& aid);

// PING over the SM-SR's current k80 channel.
bool ping(network::Network& net, SmSr& smsr, const Eid& eid);

// Maps a card status word to the typed error a procedure reports.
ErrorCode error_for_status(apdu::StatusWord sw);

}  // namespace esim::subman
