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

// POL1: the per-profile rules deciding whether a profile may be disabled or
// deleted, and whether it must be deleted once disabled.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace esim::policy {

struct Pol1 {
    bool disable_disallowed = false;  // the profile lock when set on the enabled profile
    bool delete_disallowed = false;
    bool delete_on_disable = false;

    bool operator==(const Pol1&) const = default;

    // Validating constructor: throws Error(ContradictoryRules).
    static Pol1 make(bool disable_disallowed, bool delete_disallowed, bool delete_on_disable);

    // bit0 disable_disallowed, bit1 delete_disallowed, bit2 delete_on_disable
    std::uint8_t to_bits() const;
    // Throws Error(WrongData) for undefined bits and Error(ContradictoryRules).
    static Pol1 from_bits(std::uint8_t bits);

    // "none" or a comma-separated list of the set field names.
    std::string to_string() const;
    static std::optional<Pol1> parse(std::string_view text);
};

enum class Verdict : std::uint8_t { Allow, Deny };
enum class Followup : std::uint8_t { None, DeleteProfile };

struct PolicyDecision {
    Verdict verdict = Verdict::Allow;
    Followup followup = Followup::None;

    bool allowed() const { return verdict == Verdict::Allow; }
    bool operator==(const PolicyDecision&) const = default;
};

enum class ProfileState : std::uint8_t { Disabled, Enabled };

// Throws Error(ContradictoryRules) for delete_on_disable together with delete_disallowed.
void validate(const Pol1& p);
bool is_valid(const Pol1& p) noexcept;

PolicyDecision check_disable(const Pol1& p);

// An enabled profile is never deletable; it must be disabled first.
PolicyDecision check_delete(const Pol1& p, ProfileState state);

}  // namespace esim::policy
