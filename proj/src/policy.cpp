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

#include "esim/policy.hpp"

#include <sstream>

#include "esim/error.hpp"

namespace esim::policy {

Pol1 Pol1::make(bool disable_disallowed, bool delete_disallowed, bool delete_on_disable) {
    Pol1 p{disable_disallowed, delete_disallowed, delete_on_disable};
    validate(p);
    return p;
}

std::uint8_t Pol1::to_bits() const {
    return static_cast<std::uint8_t>((disable_disallowed ? 0x01 : 0) | (delete_disallowed ? 0x02 : 0) |
                                     (delete_on_disable ? 0x04 : 0));
}

Pol1 Pol1::from_bits(std::uint8_t bits) {
    if (bits & ~0x07) throw Error(ErrorCode::WrongData, "undefined POL1 bits");
    Pol1 p{(bits & 0x01) != 0, (bits & 0x02) != 0, (bits & 0x04) != 0};
    validate(p);
    return p;
}

std::string Pol1::to_string() const {
    std::string out;
    auto add = [&](bool on, std::string_view name) {
        if (!on) return;
        if (!out.empty()) out += ',';
        out += name;
    };
    add(disable_disallowed, "disable_disallowed");
    add(delete_disallowed, "delete_disallowed");
    add(delete_on_disable, "delete_on_disable");
    return out.empty() ? "none" : out;
}

std::optional<Pol1> Pol1::parse(std::string_view text) {
    Pol1 p;
    if (text == "none") return p;
    std::stringstream ss{std::string(text)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "disable_disallowed") p.disable_disallowed = true;
        else if (item == "delete_disallowed") p.delete_disallowed = true;
        else if (item == "delete_on_disable") p.delete_on_disable = true;
        else return std::nullopt;
    }
    return p;
}

bool is_valid(const Pol1& p) noexcept { return !(p.delete_on_disable && p.delete_disallowed); }

void validate(const Pol1& p) {
    if (!is_valid(p))
        throw Error(ErrorCode::ContradictoryRules, "delete_on_disable conflicts with delete_disallowed");
}

PolicyDecision check_disable(const Pol1& p) {
    if (p.disable_disallowed) return {Verdict::Deny, Followup::None};
    return {Verdict::Allow, p.delete_on_disable ? Followup::DeleteProfile : Followup::None};
}

PolicyDecision check_delete(const Pol1& p, ProfileState state) {
    if (p.delete_disallowed || state == ProfileState::Enabled) return {Verdict::Deny, Followup::None};
    return {Verdict::Allow, Followup::None};
}

}  // namespace esim::policy
