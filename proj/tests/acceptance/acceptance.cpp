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

// Acceptance run: one line per criterion, exit status 0 only when all pass.

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "esim/apdu.hpp"
#include "esim/crypto/ecka.hpp"
#include "esim/crypto/kdf.hpp"
#include "esim/crypto/keys.hpp"
#include "esim/crypto/random.hpp"
#include "esim/crypto/secure_channel.hpp"
#include "esim/error.hpp"
#include "esim/policy.hpp"
#include "esim/scenario/runner.hpp"
#include "esim/scenario/scenario.hpp"
#include "support/apdu_gen.hpp"
#include "support/pol1_table.hpp"
#include "support/reference_card.hpp"
#include "support/sim_fixture.hpp"

using namespace esim;
using namespace esim::crypto;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;
};

// Records the first failure; later ones only bump the count.
class Failures {
public:
    void add(const std::string& what) {
        if (count_++ == 0) first_ = what;
    }
    std::size_t count() const { return count_; }
    Verdict verdict(const std::string& summary) const {
        if (count_ == 0) return {true, summary};
        return {false, std::to_string(count_) + " failure(s), first: " + first_};
    }

private:
    std::size_t count_ = 0;
    std::string first_;
};

std::optional<ErrorCode> error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

std::string name_of(std::optional<ErrorCode> e) { return e ? std::string(to_string(*e)) : "no error"; }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

scenario::Scenario load_scenario(const std::string& name) {
    return scenario::parse_scenario(read_file(std::filesystem::path(ESIM_SCENARIO_DIR) / name));
}

// 1. APDU codec.
Verdict apdu_codec() {
    Failures f;
    std::mt19937_64 g(20261016);
    constexpr int kCount = 10000;
    for (int i = 0; i < kCount; ++i) {
        const auto c = fixture::random_command(g);
        try {
            const auto bytes = apdu::encode_command(c);
            if (bytes != fixture::reference_encode(c)) f.add("command " + std::to_string(i) + " differs from reference");
            if (apdu::decode_command(bytes) != c) f.add("command " + std::to_string(i) + " does not round-trip");
        } catch (const std::exception& e) {
            f.add("command " + std::to_string(i) + ": " + e.what());
        }
        const auto r = fixture::random_response(g);
        try {
            if (apdu::decode_response(apdu::encode_response(r)) != r)
                f.add("response " + std::to_string(i) + " does not round-trip");
        } catch (const std::exception& e) {
            f.add("response " + std::to_string(i) + ": " + e.what());
        }
    }

    std::vector<Bytes> inputs;
    for (std::size_t n = 0; n < 10; ++n) inputs.emplace_back(n, 0x00);
    for (std::size_t n : {65535u, 65536u}) {
        inputs.emplace_back(n, 0x00);
        inputs.emplace_back(n, 0xFF);
    }
    std::size_t untyped = 0;
    std::size_t accepted = 0;
    auto probe = [&](const Bytes& b) {
        try {
            const auto c = apdu::decode_command(b);
            ++accepted;
            if (apdu::encode_command(c) != b) f.add("non-canonical command accepted");
        } catch (const Error&) {
        } catch (...) {
            ++untyped;
        }
        try {
            const auto r = apdu::decode_response(b);
            if (apdu::encode_response(r) != b) f.add("non-canonical response accepted");
        } catch (const Error&) {
        } catch (...) {
            ++untyped;
        }
    };
    for (const auto& b : inputs) probe(b);
    for (int i = 0; i < kCount; ++i) probe(fixture::random_octets(g));
    if (untyped) f.add(std::to_string(untyped) + " untyped exceptions on arbitrary input");
    return f.verdict(std::to_string(kCount) + " commands, " + std::to_string(kCount) + " responses, " +
                     std::to_string(kCount + inputs.size()) + " arbitrary inputs (" + std::to_string(accepted) +
                     " valid)");
}

// 2. ECKA.
struct Parties {
    explicit Parties(std::uint64_t seed)
        : rng(seed, "acceptance-ecka"),
          ci_rng(rng.fork("ci")),
          ci(ci_rng),
          card_keys(generate_keypair(rng, Scheme::KeyAgreement)),
          card_cert(ci.issue("card", card_keys.public_key)),
          dp_keys(generate_keypair(rng, Scheme::Signature)),
          dp_cert(ci.issue("smdp", dp_keys.public_key)) {}

    EckaInitiator initiator() const {
        return EckaInitiator(dp_keys, dp_cert, ci.root(), card_cert, std::string(kProfileCredentialsContext),
                             KeyRole::ProfileCredentials);
    }
    EckaResponder responder() const {
        return EckaResponder(card_keys, ci.root(), std::string(kProfileCredentialsContext),
                             KeyRole::ProfileCredentials);
    }

    DeterministicRandom rng;
    DeterministicRandom ci_rng;
    CertificateIssuer ci;
    KeyPair card_keys;
    Certificate card_cert;
    KeyPair dp_keys;
    Certificate dp_cert;
};

// Which error a single mutated octet must produce.
ErrorCode expected_ecka_error(EckaStep step, std::size_t index) {
    switch (step) {
        case EckaStep::Certificate: return ErrorCode::BadCertificate;
        case EckaStep::Challenge: return ErrorCode::ChallengeMismatch;
        case EckaStep::Offer: break;
    }
    if (index >= kPublicKeySize && index < kPublicKeySize + kChallengeSize) return ErrorCode::ChallengeMismatch;
    return ErrorCode::BadSignature;
}

Verdict ecka() {
    Failures f;
    constexpr std::uint64_t kRuns = 1000;
    for (std::uint64_t seed = 1; seed <= kRuns; ++seed) {
        const Parties p(seed);
        auto init = p.initiator();
        auto resp = p.responder();
        TranscriptChannel channel;
        DeterministicRandom ir(seed, "initiator");
        DeterministicRandom rr(seed, "responder");
        try {
            const auto keys = ecka_run(init, resp, channel, ir, rr);
            const auto offer = EckaOffer::decode(channel.entries().at(2).message);
            const auto oracle = derive_key(agree(p.card_keys.private_key, offer.ephemeral), kProfileCredentialsContext);
            if (!(keys.initiator == keys.responder)) f.add("honest seed " + std::to_string(seed) + ": keys differ");
            if (!(keys.responder == oracle)) f.add("honest seed " + std::to_string(seed) + ": key differs from oracle");
        } catch (const std::exception& e) {
            f.add("honest seed " + std::to_string(seed) + ": " + e.what());
        }
    }

    // Each mutated run applies one of: an octet flip, a message replayed from
    // an earlier honest session of the same parties, or a message from another
    // step delivered out of order.
    std::mt19937_64 g(0xECCA);
    std::map<ErrorCode, std::size_t> seen;
    std::array<std::size_t, 3> kinds{};
    for (std::uint64_t run = 1; run <= kRuns; ++run) {
        const Parties p(kRuns + run);
        std::vector<TranscriptEntry> earlier;
        {
            auto init = p.initiator();
            auto resp = p.responder();
            TranscriptChannel channel;
            DeterministicRandom ir(run, "earlier-initiator");
            DeterministicRandom rr(run, "earlier-responder");
            ecka_run(init, resp, channel, ir, rr);
            earlier = channel.entries();
        }
        auto init = p.initiator();
        auto resp = p.responder();
        const int kind = static_cast<int>(g() % 3);
        ++kinds[kind];
        auto step = static_cast<EckaStep>(g() % 3);
        if (kind == 1 && step == EckaStep::Certificate) step = EckaStep::Offer;  // certificates are static
        const auto other = static_cast<EckaStep>((static_cast<int>(step) + 1 + g() % 2) % 3);
        const std::uint64_t position = g();
        const auto mask = static_cast<std::uint8_t>(1 + g() % 255);
        std::size_t index = 0;
        TamperingChannel channel([&](EckaStep s, Bytes& m) {
            if (s != step) return;
            switch (kind) {
                case 0:
                    index = position % m.size();
                    m[index] ^= mask;
                    break;
                case 1: m = earlier.at(static_cast<std::size_t>(step)).message; break;
                default: m = earlier.at(static_cast<std::size_t>(other)).message; break;
            }
        });
        DeterministicRandom ir(run, "initiator");
        DeterministicRandom rr(run, "responder");
        const auto got = error_of([&] { ecka_run(init, resp, channel, ir, rr); });
        ErrorCode want = ErrorCode::ChallengeMismatch;
        std::string what;
        switch (kind) {
            case 0:
                want = expected_ecka_error(step, index);
                what = "octet " + std::to_string(index) + " of " + std::string(ecka_step_name(step));
                break;
            case 1:
                want = ErrorCode::ChallengeMismatch;
                what = "replayed " + std::string(ecka_step_name(step));
                break;
            default:
                want = step == EckaStep::Certificate ? ErrorCode::BadCertificate
                       : step == EckaStep::Challenge ? ErrorCode::ChallengeMismatch
                                                     : ErrorCode::BadSignature;
                what = std::string(ecka_step_name(other)) + " in place of " + std::string(ecka_step_name(step));
                break;
        }
        const std::string where = "mutation " + std::to_string(run) + " (" + what + ")";
        if (got != want) f.add(where + ": expected " + std::string(to_string(want)) + ", got " + name_of(got));
        if (got) ++seen[*got];
        if (init.holds_secret() || init.key() || resp.holds_secret() || resp.awaiting_offer())
            f.add(where + ": key material retained");
    }

    // Offers delivered with no challenge outstanding.
    for (std::uint64_t run = 1; run <= 10; ++run) {
        const Parties p(3 * kRuns + run);
        auto init = p.initiator();
        auto resp = p.responder();
        DeterministicRandom ir(run, "initiator");
        DeterministicRandom rr(run, "responder");
        const auto offer = init.on_challenge(resp.on_certificate(init.hello(), rr), ir);
        auto fresh = p.responder();
        if (const auto e = error_of([&] { fresh.on_offer(offer); }); e != ErrorCode::StaleChallenge)
            f.add("offer before certificate: " + name_of(e));
        resp.on_offer(offer);
        if (const auto e = error_of([&] { resp.on_offer(offer); }); e != ErrorCode::StaleChallenge)
            f.add("offer delivered twice: " + name_of(e));
        if (fresh.holds_secret() || fresh.awaiting_offer()) f.add("early offer left key material");
    }
    std::string mix;
    for (const auto& [code, n] : seen) mix += " " + std::string(to_string(code)) + "=" + std::to_string(n);
    return f.verdict(std::to_string(kRuns) + " honest, " + std::to_string(kRuns) + " mutated (" +
                     std::to_string(kinds[0]) + " flipped, " + std::to_string(kinds[1]) + " replayed, " +
                     std::to_string(kinds[2]) + " misordered):" + mix);
}

// 3. Secure channel.
Verdict secure_channel() {
    Failures f;
    std::mt19937_64 g(0x5C80);
    constexpr std::size_t kRecords = 1000;
    constexpr std::size_t kPerKey = 10;
    constexpr std::size_t kMutations = 12;
    std::size_t mutations = 0;
    std::size_t replays = 0;
    for (std::size_t group = 0; group < kRecords / kPerKey; ++group) {
        const SymmetricKey key(fixture::random_bytes(g, kSymmetricKeySize), KeyRole::K80);
        const bool card_sends = group % 2 == 1;
        SecureChannelSession sender(key, card_sends ? ChannelRole::Responder : ChannelRole::Initiator, "peer");
        SecureChannelSession receiver(key, card_sends ? ChannelRole::Initiator : ChannelRole::Responder, "peer");
        std::vector<std::pair<Bytes, Bytes>> delivered;
        for (std::size_t i = 0; i < kPerKey; ++i) {
            const auto plaintext = fixture::random_bytes(g, g() % 300);
            const auto ad = fixture::random_bytes(g, g() % 20);
            const auto record = sender.wrap_bytes(plaintext, ad);
            const std::string where = "record " + std::to_string(group * kPerKey + i);
            const auto counter = receiver.recv_counter();

            std::set<std::size_t> positions;
            while (positions.size() < kMutations) positions.insert(g() % record.size());
            for (const auto pos : positions) {
                auto bad = record;
                bad[pos] ^= static_cast<std::uint8_t>(1 + g() % 255);
                const auto e = error_of([&] { receiver.unwrap_bytes(bad, ad); });
                ++mutations;
                if (e != ErrorCode::TamperDetected && e != ErrorCode::ReplayDetected)
                    f.add(where + " octet " + std::to_string(pos) + ": " + name_of(e));
                if (receiver.recv_counter() != counter) f.add(where + ": counter moved on a rejected record");
            }
            try {
                if (receiver.unwrap_bytes(record, ad) != plaintext) f.add(where + ": wrong plaintext");
            } catch (const Error& e) {
                f.add(where + ": untouched record rejected: " + e.what());
            }
            delivered.emplace_back(record, ad);
            // The record just delivered, then any earlier one.
            for (const auto* r : {&delivered.back(), &delivered[g() % delivered.size()]}) {
                const auto e = error_of([&] { receiver.unwrap_bytes(r->first, r->second); });
                ++replays;
                if (e != ErrorCode::ReplayDetected) f.add(where + ": replay gave " + name_of(e));
            }
        }
    }
    return f.verdict(std::to_string(kRecords) + " records, " + std::to_string(mutations) + " mutations, " +
                     std::to_string(replays) + " replays");
}

// 4. Card state machine against the reference model.
Verdict card_model() {
    Failures f;
    constexpr std::uint64_t kSequences = 5000;
    for (std::uint64_t seed = 1; seed <= kSequences; ++seed) {
        if (const auto m = fixture::check_sequence(seed, 20, 3))
            f.add("seed " + std::to_string(seed) + " step " + std::to_string(m->step) + ": " + m->what);
    }
    return f.verdict(std::to_string(kSequences) + " sequences of 20 steps, up to 3 profiles");
}

// 5. POL1 truth table.
Verdict pol1_table() {
    Failures f;
    const auto rows = fixture::load_pol1_table(ESIM_TEST_DATA_DIR "/pol1_truth_table.csv");
    std::set<std::string> keys;
    for (const auto& r : rows) keys.insert(r.describe());
    if (rows.size() != 32 || keys.size() != 32) f.add("table must hold 32 distinct rows");
    std::uint64_t seed = 500;
    for (const auto& row : rows) {
        if (const auto e = fixture::engine_outcome(row); e != row.outcome)
            f.add("line " + std::to_string(row.line) + " engine: " + e + ", table: " + row.outcome);
        if (const auto c = fixture::card_outcome(row, ++seed); c != row.outcome)
            f.add("line " + std::to_string(row.line) + " card: " + c + ", table: " + row.outcome);
    }
    std::size_t rejected = 0;
    for (std::uint8_t bits = 0; bits < 8; ++bits) {
        const bool disable = bits & 1;
        const bool del = bits & 2;
        const bool on_disable = bits & 4;
        const auto e = error_of([&] { policy::Pol1::make(disable, del, on_disable); });
        const bool contradictory = del && on_disable;
        if (contradictory != (e == ErrorCode::ContradictoryRules))
            f.add("make(" + std::to_string(disable) + std::to_string(del) + std::to_string(on_disable) +
                  "): " + name_of(e));
        rejected += e.has_value();
    }
    if (rejected != 2) f.add(std::to_string(rejected) + " combinations rejected at construction");
    return f.verdict(std::to_string(rows.size()) + " rows on engine and card, " + std::to_string(rejected) +
                     " contradictory combinations rejected");
}

// 6. Download.
network::FaultRule fault(network::FaultAction action, const std::string& label, std::optional<std::string> dst) {
    network::FaultRule r;
    r.action = action;
    r.label = label;
    r.dst = std::move(dst);
    return r;
}

Verdict download() {
    Failures f;
    {
        fixture::Sim sim(31);
        const auto aid = subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request());
        const auto* isdp = sim.card->find(aid);
        if (!isdp || isdp->state != euicc::IsdpState::Personalized || !isdp->profile ||
            isdp->profile->state != policy::ProfileState::Disabled)
            f.add("flagship: profile is not Personalized and Disabled");
        if (isdp && isdp->install_key) f.add("flagship: card kept the installation key");
        const auto& eis = sim.smsr_a.record(sim.eid());
        if (!eis.find(aid) || !subman::eis_matches_card(eis, *sim.card)) f.add("flagship: EIS entry does not match");
        if (!sim.smdp.holds_no_key()) f.add("flagship: SM-DP still holds k");
    }
    std::size_t faults = 0;
    for (const auto& [label, action] : std::vector<std::pair<std::string, network::FaultAction>>{
             {"download:3", network::FaultAction::Drop},
             {"download:3", network::FaultAction::TamperOctet},
             {"download:5", network::FaultAction::Drop},
             {"download:5", network::FaultAction::TamperOctet},
             {"download:6", network::FaultAction::Drop},
             {"download:6", network::FaultAction::TamperOctet}}) {
        fixture::Sim sim(40 + faults);
        const auto before = sim.card->snapshot();
        const auto eis_before = sim.smsr_a.record(sim.eid());
        sim.net.faults().add(fault(action, label, network::card_address(sim.eid().hex())));
        const auto e = error_of([&] { subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request()); });
        const std::string where = label + " " + std::string(network::fault_action_name(action));
        ++faults;
        if (!e) f.add(where + ": download succeeded");
        if (sim.net.faults_fired() != 1) f.add(where + ": fault did not fire");
        if (sim.card->snapshot() != before) f.add(where + ": card differs from the pre-call snapshot");
        if (!(sim.smsr_a.record(sim.eid()) == eis_before)) f.add(where + ": EIS changed");
        if (!sim.smdp.holds_no_key()) f.add(where + ": SM-DP still holds k");
    }
    const auto fixture_run = scenario::run(load_scenario("download_faults.scn"));
    if (!fixture_run.report.passed()) f.add("download_faults.scn failed:\n" + fixture_run.report.text());
    return f.verdict("flagship run, " + std::to_string(faults) + " faults at steps 3, 5, 6, download_faults.scn");
}

// 7. Handover.
std::string registry_json(const subman::SmSr& smsr) {
    std::string out;
    for (const auto& r : smsr.records()) out += r.to_json().dump() + "\n";
    return out;
}

// Runs the fixture cut just before its first handover fault and cut just
// after the failing handover; every card and registry digest must agree.
void compare_around_failure(const std::string& file, Failures& f) {
    const auto full = load_scenario(file);
    std::optional<std::size_t> fault_at;
    std::optional<std::size_t> change_at;
    for (std::size_t i = 0; i < full.steps.size(); ++i) {
        const auto& s = full.steps[i];
        if (!fault_at && s.kind == scenario::StepKind::InjectFault) fault_at = i;
        if (fault_at && s.kind == scenario::StepKind::SmsrChange && s.expected != "OK") {
            change_at = i;
            break;
        }
    }
    if (!fault_at || !change_at) {
        f.add(file + ": no failing handover");
        return;
    }
    auto before = full;
    before.expectations.clear();
    before.steps.resize(*fault_at);
    auto after = full;
    after.expectations.clear();
    after.steps.resize(*change_at + 1);
    const auto a = scenario::run(before);
    const auto b = scenario::run(after);
    if (!b.report.passed()) f.add(file + ": handover did not fail as written");
    for (const auto& [name, digest] : a.report.digests) {
        if (name == "trace") continue;
        if (b.report.digests.at(name) != digest) f.add(file + ": " + name + " changed by the failed handover");
    }
}

Verdict handover() {
    Failures f;
    std::size_t fixtures = 0;
    for (const char* file : {"lifecycle.scn", "handover_refused.scn", "handover_step2_lost.scn",
                             "handover_keyfail.scn", "handover_answer_lost.scn"}) {
        const auto r = scenario::run(load_scenario(file));
        ++fixtures;
        if (!r.report.passed()) f.add(std::string(file) + " failed:\n" + r.report.text());
    }
    compare_around_failure("handover_step2_lost.scn", f);
    compare_around_failure("handover_keyfail.scn", f);

    {
        fixture::Sim sim(51);
        subman::download_profile(sim.net, sim.mno1, sim.smdp, sim.smsr_a, sim.request());
        const auto old_key = sim.smsr_a.record(sim.eid()).k80;
        subman::smsr_change(sim.net, sim.mno1, sim.smsr_a, sim.smsr_b, sim.eid());
        if (sim.smsr_a.holds(sim.eid())) f.add("old registry still lists the eid");
        for (std::uint64_t counter : {1ull, 1000ull, 1ull << 40}) {
            auto stale = SecureChannelSession::resume(old_key, ChannelRole::Initiator, "old", counter, 0);
            const auto reply = sim.card->handle_ota(
                stale.wrap_bytes(apdu::encode_command(apdu::make_command(apdu::Ins::Ping)), sim.eid().bytes()));
            if (to_hex(reply) != "6982") f.add("old-key record accepted at counter " + std::to_string(counter));
        }
    }
    std::size_t faults = 0;
    for (const auto& [label, action] : std::vector<std::pair<std::string, network::FaultAction>>{
             {"handover:2", network::FaultAction::Drop},
             {"handover:5", network::FaultAction::Drop},
             {"handover:5", network::FaultAction::TamperOctet}}) {
        fixture::Sim sim(60 + faults);
        ++faults;
        const auto dst = label == "handover:5" ? std::optional(network::card_address(sim.eid().hex())) : std::nullopt;
        const auto a = registry_json(sim.smsr_a);
        const auto b = registry_json(sim.smsr_b);
        const auto k = sim.card->k80_fingerprint();
        sim.net.faults().add(fault(action, label, dst));
        const std::string where = label + " " + std::string(network::fault_action_name(action));
        if (!error_of([&] { subman::smsr_change(sim.net, sim.mno1, sim.smsr_a, sim.smsr_b, sim.eid()); }))
            f.add(where + ": handover succeeded");
        if (registry_json(sim.smsr_a) != a || registry_json(sim.smsr_b) != b) f.add(where + ": registry changed");
        if (sim.card->k80_fingerprint() != k) f.add(where + ": card key changed");
    }
    return f.verdict(std::to_string(fixtures) + " fixtures, 2 cut comparisons, " + std::to_string(faults) +
                     " direct failures at steps 2 and 5");
}

// 8. Determinism and suite time.
Verdict determinism() {
    Failures f;
    const auto lifecycle = load_scenario("lifecycle.scn");
    const auto a = scenario::run(lifecycle);
    const auto b = scenario::run(lifecycle);
    if (a.trace != b.trace) f.add("lifecycle traces differ");
    if (a.report.text() != b.report.text()) f.add("lifecycle reports differ");
    if (a.report.to_json().dump() != b.report.to_json().dump()) f.add("lifecycle JSON reports differ");
    if (!scenario::replay(scenario::trace_file(lifecycle, lifecycle.seed, a.trace)).identical)
        f.add("lifecycle replay differs");

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(ESIM_SCENARIO_DIR))
        if (entry.path().extension() == ".scn") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    const auto start = std::chrono::steady_clock::now();
    for (const auto& path : files) {
        const auto r = scenario::run(scenario::parse_scenario(read_file(path)));
        const bool should_fail = path.stem() == "locked_disable_fails";
        if (r.report.passed() == should_fail) f.add(path.filename().string() + " did not give the written result");
    }
    const std::chrono::duration<double> suite = std::chrono::steady_clock::now() - start;
    if (suite.count() >= 60.0) f.add("suite took " + std::to_string(suite.count()) + " s");
    std::ostringstream summary;
    summary << "lifecycle trace " << a.report.digests.at("trace") << " twice, " << files.size()
            << " scenarios in " << std::fixed << std::setprecision(2) << suite.count() << " s";
    return f.verdict(summary.str());
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0: no limit
    Verdict (*check)();
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "apdu-codec", 10.0, apdu_codec},
        {2, "ecka", 30.0, ecka},
        {3, "secure-channel", 30.0, secure_channel},
        {4, "card-state-machine", 0.0, card_model},
        {5, "pol1-truth-table", 0.0, pol1_table},
        {6, "download", 0.0, download},
        {7, "handover", 0.0, handover},
        {8, "determinism", 0.0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        if (c.limit_seconds > 0 && elapsed.count() >= c.limit_seconds) {
            v.ok = false;
            v.detail += "; over the " + std::to_string(static_cast<int>(c.limit_seconds)) + " s limit";
        }
        failed += !v.ok;
        std::cout << (v.ok ? "PASS" : "FAIL") << " " << c.id << " " << std::left << std::setw(19) << c.name
                  << std::right << std::fixed << std::setprecision(2) << std::setw(7) << elapsed.count() << " s  "
                  << v.detail << std::endl;
    }
    std::cout << (failed ? "FAIL" : "PASS") << " " << (8 - failed) << "/8 criteria" << std::endl;
    return failed ? 1 : 0;
}
