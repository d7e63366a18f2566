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

#include <gtest/gtest.h>

#include <sstream>

#include "esim/error.hpp"
#include "support/sim_fixture.hpp"

using namespace esim;
using fixture::Sim;
using network::FaultAction;
using network::FaultRule;
using subman::ProfileOp;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::WrongData;
}

FaultRule fault(FaultAction action, const std::string& label, std::optional<std::string> dst = std::nullopt) {
    FaultRule r;
    r.action = action;
    r.label = label;
    r.dst = std::move(dst);
    return r;
}

std::string registry_json(const subman::SmSr& smsr) {
    std::string out;
    for (const auto& r : smsr.records()) out += r.to_json().dump() + "\n";
    return out;
}

std::string card_addr(const Sim& sim) { return network::card_address(sim.eid().hex()); }

}  // namespace

TEST(Registration, DuplicateAndUnknown) {
    Sim sim;
    EXPECT_TRUE(sim.smsr_a.holds(sim.eid()));
    EXPECT_EQ(code_of([&] { subman::smsr_register(sim.smsr_a, *sim.eis); }), ErrorCode::DuplicateEid);
    EXPECT_EQ(code_of([&] { sim.smsr_b.record(sim.eid()); }), ErrorCode::UnknownEid);
    EXPECT_TRUE(subman::ping(sim.net, sim.smsr_a, sim.eid()));
    EXPECT_FALSE(subman::ping(sim.net, sim.smsr_b, sim.eid()));
}

TEST(Download, HappyPath) {
    Sim sim;
    sim.mno1.subscribe(sim.eid(), {"iot", policy::Pol1{false, true, false}});
    auto request = sim.request();
    request.pol1 = policy::Pol1{false, true, false};
    const auto aid = subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, request);

    const auto* isdp = sim.card->find(aid);
    ASSERT_NE(isdp, nullptr);
    EXPECT_EQ(isdp->state, euicc::IsdpState::Personalized);
    EXPECT_EQ(isdp->profile->state, policy::ProfileState::Disabled);
    EXPECT_EQ(isdp->profile->mno_id, "mno1");
    EXPECT_TRUE(isdp->profile->pol1.delete_disallowed);
    EXPECT_FALSE(isdp->install_key);

    const auto& eis = sim.smsr_a.record(sim.eid());
    EXPECT_TRUE(subman::eis_matches_card(eis, *sim.card));
    ASSERT_NE(eis.find(aid), nullptr);
    EXPECT_EQ(eis.find(aid)->mno_id, "mno1");
    EXPECT_EQ(eis.find(aid)->pol1_mirror, (policy::Pol1{false, true, false}));

    EXPECT_TRUE(sim.smdp.holds_no_key());
    ASSERT_NE(sim.mno1.owned(sim.eid()), nullptr);
    EXPECT_EQ(sim.mno1.owned(sim.eid())->aid, aid);
    EXPECT_EQ(sim.mno1.owned(sim.eid())->mno_sd_key, isdp->profile->mno_sd_key);
}

TEST(Download, UnknownCardSendsNothing) {
    Sim sim;
    const auto sends = sim.net.sends();
    EXPECT_EQ(code_of([&] { subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_b, sim.request()); }),
              ErrorCode::UnknownEid);
    EXPECT_EQ(sim.net.sends(), sends);
}

TEST(Download, FaultsRollBack) {
    struct Case {
        std::string label;
        FaultAction action;
        ErrorCode expected;
    };
    const Case cases[] = {
        {"download:3", FaultAction::Drop, ErrorCode::IsdpCreationFailed},
        {"download:4", FaultAction::TamperOctet, ErrorCode::KeyAgreementFailed},
        {"download:5", FaultAction::TamperOctet, ErrorCode::InstallRejected},
        {"download:6", FaultAction::Drop, ErrorCode::InstallRejected},
        {"download:6", FaultAction::TamperOctet, ErrorCode::InstallRejected},
    };
    for (const auto& c : cases) {
        Sim sim;
        const auto before = sim.card->snapshot();
        const auto eis_before = sim.smsr_a.record(sim.eid());
        sim.net.faults().add(fault(c.action, c.label, card_addr(sim)));
        EXPECT_EQ(code_of([&] { subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request()); }),
                  c.expected)
            << c.label;
        EXPECT_EQ(sim.net.faults_fired(), 1u) << c.label;
        EXPECT_EQ(sim.card->snapshot(), before) << c.label;
        EXPECT_EQ(sim.smsr_a.record(sim.eid()), eis_before) << c.label;
        EXPECT_TRUE(sim.smdp.holds_no_key()) << c.label;
        EXPECT_EQ(sim.mno1.owned(sim.eid()), nullptr) << c.label;
        EXPECT_FALSE(sim.smsr_a.locked(sim.eid())) << c.label;

        // The next attempt goes through.
        EXPECT_NO_THROW(subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request())) << c.label;
        EXPECT_TRUE(subman::eis_matches_card(sim.smsr_a.record(sim.eid()), *sim.card));
    }
}

TEST(ProfileCommands, EnableDisableDeleteThroughSmsr) {
    Sim sim;
    const auto aid = subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request());
    auto cmd = [&](ProfileOp op) { return subman::profile_command(sim.net, sim.mno1, sim.smsr_a, sim.eid(), op, aid); };
    EXPECT_EQ(cmd(ProfileOp::Enable), apdu::StatusWord::Success);
    EXPECT_EQ(sim.smsr_a.record(sim.eid()).enabled()->isdp_id, aid);
    EXPECT_EQ(cmd(ProfileOp::Delete), apdu::StatusWord::ConditionsNotSatisfied);
    EXPECT_EQ(cmd(ProfileOp::Disable), apdu::StatusWord::Success);
    EXPECT_EQ(cmd(ProfileOp::SetFallback), apdu::StatusWord::Success);
    EXPECT_TRUE(sim.smsr_a.record(sim.eid()).find(aid)->fallback);
    EXPECT_EQ(cmd(ProfileOp::ClearFallback), apdu::StatusWord::Success);
    EXPECT_EQ(cmd(ProfileOp::Delete), apdu::StatusWord::Success);
    EXPECT_EQ(cmd(ProfileOp::Delete), apdu::StatusWord::ReferencedDataNotFound);
    EXPECT_EQ(sim.smsr_a.record(sim.eid()).find(aid), nullptr);
    EXPECT_TRUE(subman::eis_matches_card(sim.smsr_a.record(sim.eid()), *sim.card));
}

TEST(ProfileCommands, OnlyMnosMayAsk) {
    Sim sim;
    network::Envelope env;
    env.src = "smdp";
    env.dst = "smsr-a";
    env.label = "enable";
    env.payload = network::plain({{"type", "ProfileCommand"},
                                  {"eid", sim.eid().hex()},
                                  {"aid", to_hex(euicc::isdp_aid(0))},
                                  {"op", "disable"}});
    const auto before = sim.card->snapshot();
    const auto seq = sim.net.send(env);
    const auto reply = network::parse_plain(sim.net.await_reply("smdp", seq).payload);
    EXPECT_EQ(reply["type"], "Error");
    EXPECT_EQ(reply["error"], "SecurityStatus");
    sim.net.settle();
    EXPECT_EQ(sim.card->snapshot(), before);
}

TEST(Policy, UpdateGoesToCardAndMirror) {
    Sim sim;
    const auto aid = subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request());
    const policy::Pol1 lock{true, false, false};

    // Not enabled yet: the card refuses and the mirror is put back.
    EXPECT_EQ(code_of([&] { subman::mno_update_policy(sim.net, sim.mno1, sim.smsr_a, sim.eid(), lock); }),
              ErrorCode::NotEnabled);
    EXPECT_EQ(sim.smsr_a.record(sim.eid()).find(aid)->pol1_mirror, policy::Pol1{});
    EXPECT_EQ(sim.card->find(aid)->profile->pol1, policy::Pol1{});

    ASSERT_EQ(subman::profile_command(sim.net, sim.mno1, sim.smsr_a, sim.eid(), ProfileOp::Enable, aid),
              apdu::StatusWord::Success);
    subman::mno_update_policy(sim.net, sim.mno1, sim.smsr_a, sim.eid(), lock);
    EXPECT_EQ(sim.smsr_a.record(sim.eid()).find(aid)->pol1_mirror, lock);
    EXPECT_EQ(sim.card->find(aid)->profile->pol1, lock);
    EXPECT_EQ(subman::profile_command(sim.net, sim.mno1, sim.smsr_a, sim.eid(), ProfileOp::Disable, aid),
              apdu::StatusWord::ConditionsNotSatisfied);

    // An MNO without a profile on the card cannot touch POL1.
    EXPECT_EQ(code_of([&] { subman::mno_update_policy(sim.net, sim.mno2, sim.smsr_a, sim.eid(), {}); }),
              ErrorCode::SecurityStatus);
}

TEST(Handover, MovesCardAndRetiresOldKey) {
    Sim sim;
    subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request());
    const auto old_key = sim.smsr_a.record(sim.eid()).k80;
    subman::smsr_change(sim.net, sim.mno1, sim.smsr_a, sim.smsr_b, sim.eid());

    EXPECT_FALSE(sim.smsr_a.holds(sim.eid()));
    EXPECT_FALSE(sim.smsr_a.escrows(sim.eid()));
    EXPECT_TRUE(sim.smsr_b.holds(sim.eid()));
    EXPECT_NE(sim.smsr_b.record(sim.eid()).k80, old_key);
    EXPECT_EQ(sim.card->k80_fingerprint(), sim.smsr_b.record(sim.eid()).k80.fingerprint());
    EXPECT_TRUE(subman::eis_matches_card(sim.smsr_b.record(sim.eid()), *sim.card));
    EXPECT_TRUE(subman::ping(sim.net, sim.smsr_b, sim.eid()));

    auto stale = crypto::SecureChannelSession::resume(old_key, crypto::ChannelRole::Initiator, "x", 1000, 0);
    const auto reply = sim.card->handle_ota(
        stale.wrap_bytes(apdu::encode_command(apdu::make_command(apdu::Ins::Ping)), sim.eid().bytes()));
    EXPECT_EQ(to_hex(reply), "6982");
}

TEST(Handover, RefusedWhenFull) {
    Sim sim(7, subman::SmSrConfig{0});
    const auto a = registry_json(sim.smsr_a);
    const auto k = sim.card->k80_fingerprint();
    EXPECT_EQ(code_of([&] { subman::smsr_change(sim.net, sim.mno1, sim.smsr_a, sim.smsr_b, sim.eid()); }),
              ErrorCode::CapabilityRefused);
    EXPECT_EQ(registry_json(sim.smsr_a), a);
    EXPECT_EQ(sim.smsr_b.size(), 0u);
    EXPECT_EQ(sim.card->k80_fingerprint(), k);
}

TEST(Handover, FailuresLeaveEverythingUnchanged) {
    const std::vector<FaultRule> faults{
        fault(FaultAction::Drop, "handover:2"),
        fault(FaultAction::Drop, "handover:5", "CARD"),
        fault(FaultAction::TamperOctet, "handover:5", "CARD"),
        fault(FaultAction::Drop, "handover:6", "CARD"),
    };
    for (auto rule : faults) {
        Sim sim;
        if (rule.dst) rule.dst = card_addr(sim);
        const auto a = registry_json(sim.smsr_a);
        const auto k = sim.card->k80_fingerprint();
        sim.net.faults().add(rule);
        EXPECT_THROW(subman::smsr_change(sim.net, sim.mno1, sim.smsr_a, sim.smsr_b, sim.eid()), Error)
            << rule.describe();
        EXPECT_EQ(registry_json(sim.smsr_a), a) << rule.describe();
        EXPECT_EQ(sim.smsr_b.size(), 0u) << rule.describe();
        EXPECT_FALSE(sim.smsr_b.has_incoming(sim.eid()));
        EXPECT_EQ(sim.card->k80_fingerprint(), k) << rule.describe();
        EXPECT_FALSE(sim.card->has_pending_k80() && rule.label == "handover:2");
        EXPECT_TRUE(subman::ping(sim.net, sim.smsr_a, sim.eid())) << rule.describe();

        // And a clean retry succeeds.
        EXPECT_NO_THROW(subman::smsr_change(sim.net, sim.mno1, sim.smsr_a, sim.smsr_b, sim.eid()))
            << rule.describe();
    }
}

TEST(Handover, LostCommitAnswerResolvedByProbe) {
    Sim sim;
    FaultRule rule = fault(FaultAction::Drop, "handover:6");
    rule.src = card_addr(sim);
    sim.net.faults().add(rule);
    subman::smsr_change(sim.net, sim.mno1, sim.smsr_a, sim.smsr_b, sim.eid());
    EXPECT_TRUE(sim.smsr_b.holds(sim.eid()));
    EXPECT_FALSE(sim.smsr_a.holds(sim.eid()));
    EXPECT_NE(sim.net.trace_text().find("handover:probe"), std::string::npos);
    EXPECT_TRUE(subman::ping(sim.net, sim.smsr_b, sim.eid()));
}

TEST(Handover, ProfilesSurviveAndStayManageable) {
    Sim sim;
    const auto aid = subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request());
    subman::smsr_change(sim.net, sim.mno1, sim.smsr_a, sim.smsr_b, sim.eid());
    EXPECT_EQ(subman::profile_command(sim.net, sim.mno1, sim.smsr_b, sim.eid(), ProfileOp::Enable, aid),
              apdu::StatusWord::Success);
    EXPECT_EQ(code_of([&] {
                  subman::profile_command(sim.net, sim.mno1, sim.smsr_a, sim.eid(), ProfileOp::Disable, aid);
              }),
              ErrorCode::UnknownEid);
    // Back again.
    subman::smsr_change(sim.net, sim.mno1, sim.smsr_b, sim.smsr_a, sim.eid());
    EXPECT_TRUE(subman::eis_matches_card(sim.smsr_a.record(sim.eid()), *sim.card));
}

TEST(Eis, JsonRoundTripAndRegistryFile) {
    Sim sim;
    subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request());
    const auto record = sim.smsr_a.record(sim.eid());
    EXPECT_EQ(subman::EisRecord::from_json(record.to_json()), record);
    EXPECT_EQ(record.to_json(false).dump().find(to_hex(record.k80.material())), std::string::npos);

    std::stringstream file;
    subman::save_registry(file, {{"smsr-a", record}});
    const auto loaded = subman::load_registry(file);
    ASSERT_EQ(loaded.size(), 1u);
    EXPECT_EQ(loaded[0].smsr, "smsr-a");
    EXPECT_EQ(loaded[0].eis, record);

    std::stringstream bad("{\"smsr\":\"x\"}\n");
    try {
        subman::load_registry(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::WrongData);
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
}

TEST(Determinism, SameSeedSameTrace) {
    auto run = [](std::uint64_t seed) {
        Sim sim(seed);
        const auto aid = subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request());
        subman::profile_command(sim.net, sim.mno1, sim.smsr_a, sim.eid(), ProfileOp::Enable, aid);
        subman::smsr_change(sim.net, sim.mno1, sim.smsr_a, sim.smsr_b, sim.eid());
        return sim.net.trace_text() + sim.card->snapshot().dump();
    };
    EXPECT_EQ(run(3), run(3));
    EXPECT_NE(run(3), run(4));
}

TEST(Errors, StatusWordsMapToTypedErrors) {
    EXPECT_EQ(subman::error_for_status(apdu::StatusWord::ConditionsNotSatisfied), ErrorCode::NotEnabled);
    EXPECT_EQ(subman::error_for_status(apdu::StatusWord::SecurityStatusNotSatisfied), ErrorCode::SecurityStatus);
    EXPECT_EQ(subman::error_for_status(apdu::StatusWord::ReferencedDataNotFound), ErrorCode::NotFound);
    EXPECT_EQ(subman::error_for_status(apdu::StatusWord::WrongData), ErrorCode::WrongData);
}
