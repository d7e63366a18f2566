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

// Round-based simulated transport. A message sent in round r is delivered in
// round r+1 (or later under Delay). Delivery goes to the destination's
// handler first; envelopes the handler does not consume land in the
// destination's mailbox, where procedure drivers pick them up.
//
// Fault rules are one-shot and evaluated at send time, in plan order.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esim/bytes.hpp"
#include "json.hpp"

namespace esim::network {

enum class Layer : std::uint8_t {
    OtaIsdr,     // SM-SR <-> ISD-R, k80 records
    DpIsdp,      // SM-DP <-> ISD-P, relayed by the SM-SR
    MnoProfile,  // MNO <-> MNO-SD, relayed by the SM-SR
    ActorPlain,  // off-card actor messages (JSON)
};

std::string_view layer_name(Layer layer);
std::optional<Layer> layer_from_name(std::string_view name);

struct Envelope {
    std::uint64_t seq = 0;  // assigned by send()
    std::optional<std::uint64_t> reply_to;
    std::string src;
    std::string dst;
    Layer layer = Layer::ActorPlain;
    // For ota-isdr records: the layer of the command inside the record.
    Layer carried = Layer::ActorPlain;
    std::string label;  // procedure step, e.g. "download:5"
    Bytes payload;
};

enum class ActorKind : std::uint8_t { Card, SmSr, SmDp, Mno, Eum };

std::string_view actor_kind_name(ActorKind kind);

enum class FaultAction : std::uint8_t { Drop, TamperOctet, Duplicate, Delay };

std::string_view fault_action_name(FaultAction action);
std::optional<FaultAction> fault_action_from_name(std::string_view name);

struct FaultRule {
    std::optional<std::string> src;
    std::optional<std::string> dst;
    std::optional<Layer> layer;
    std::optional<std::uint64_t> seq;
    std::optional<std::string> label;
    std::uint32_t nth = 1;  // fire on the nth matching envelope
    FaultAction action = FaultAction::Drop;
    std::size_t index = 0;     // TamperOctet: octet position, modulo payload size
    std::uint32_t rounds = 1;  // Delay

    bool matches(const Envelope& env) const;
    std::string describe() const;
};

class FaultPlan {
public:
    void add(FaultRule rule) { rules_.push_back(Entry{std::move(rule)}); }
    // First rule whose match fires for this envelope, consumed on return.
    std::optional<FaultRule> take(const Envelope& env);
    std::size_t pending() const;
    std::size_t size() const { return rules_.size(); }

private:
    struct Entry {
        FaultRule rule;
        std::uint32_t seen = 0;
        bool fired = false;
    };
    std::vector<Entry> rules_;
};

struct TraceEvent {
    std::uint64_t round = 0;
    std::string event;  // send | deliver | fault
    std::uint64_t seq = 0;
    std::string src;
    std::string dst;
    Layer layer = Layer::ActorPlain;
    std::string digest;
    std::string note;

    nlohmann::json to_json() const;
};

class Network;

// Returns true when the envelope was consumed.
using Handler = std::function<bool(Network&, const Envelope&)>;

class Network {
public:
    static constexpr std::uint32_t kDefaultTimeout = 12;

    // Registering an actor twice replaces its handler.
    void register_actor(const std::string& id, ActorKind kind, Handler handler = {});
    bool has_actor(const std::string& id) const { return actors_.contains(id); }
    std::optional<ActorKind> kind_of(const std::string& id) const;

    // Checks actors and layering, applies faults, enqueues, returns the seq.
    // Throws Error(UnknownActor) or Error(LayeringViolation).
    std::uint64_t send(Envelope env);
    std::uint64_t reply(const Envelope& request, Layer layer, Bytes payload, Layer carried = Layer::ActorPlain);

    // Advances one round. Returns the number of deliveries.
    std::size_t step();
    bool idle() const { return queue_.empty(); }
    // Steps until nothing is in flight or the bound is hit.
    void settle(std::uint32_t max_rounds = 64);

    // Removes and returns a mailbox entry.
    std::optional<Envelope> take(const std::string& actor, const std::function<bool(const Envelope&)>& pred);
    // Steps until a reply to `seq` reaches the mailbox of `actor`.
    // Throws Error(Timeout).
    Envelope await_reply(const std::string& actor, std::uint64_t seq, std::uint32_t max_rounds = kDefaultTimeout);
    // Steps until the envelope `seq` itself reaches the mailbox of `actor`.
    Envelope await_message(const std::string& actor, std::uint64_t seq, std::uint32_t max_rounds = kDefaultTimeout);

    FaultPlan& faults() { return faults_; }
    std::uint64_t round() const { return round_; }
    std::size_t sends() const { return sends_; }
    std::size_t deliveries() const { return deliveries_; }
    std::size_t faults_fired() const { return faults_fired_; }

    const std::vector<TraceEvent>& trace() const { return trace_; }
    // One JSON object per line.
    std::string trace_text() const;
    // Adds a free-form annotation to the last event, used by actors to record
    // the outcome of what they just processed.
    void annotate(const std::string& text);

private:
    struct InFlight {
        std::uint64_t due;
        std::uint64_t order;
        Envelope env;
    };
    struct Actor {
        ActorKind kind;
        Handler handler;
        std::deque<Envelope> mailbox;
    };

    void check_layering(const Envelope& env) const;
    void enqueue(Envelope env, std::uint64_t due);
    void record(std::string event, const Envelope& env, std::string note);
    Envelope await(const std::string& actor, const std::function<bool(const Envelope&)>& pred,
                   std::uint32_t max_rounds, const std::string& what);

    std::map<std::string, Actor> actors_;
    std::vector<InFlight> queue_;
    FaultPlan faults_;
    std::vector<TraceEvent> trace_;
    std::uint64_t round_ = 0;
    std::uint64_t next_seq_ = 1;
    std::uint64_t next_order_ = 0;
    std::size_t sends_ = 0;
    std::size_t deliveries_ = 0;
    std::size_t faults_fired_ = 0;
};

// Card endpoints are addressed as "euicc:<eid hex>".
std::string card_address(std::string_view eid_hex);

// Actor-plain payloads are versioned JSON objects.
Bytes plain(const nlohmann::json& body);
// Throws Error(WrongData) on anything that is not a version-1 object.
nlohmann::json parse_plain(ByteView payload);
// Copy with secret-bearing fields replaced by their digest.
nlohmann::json redact(const nlohmann::json& body);

}  // namespace esim::network
