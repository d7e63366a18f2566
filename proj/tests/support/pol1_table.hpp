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

// Loader for the POL1 oracle table and a checker that runs each row against
// both the rule engine and a real card.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "card_driver.hpp"
#include "esim/error.hpp"
#include "esim/policy.hpp"

namespace esim::fixture {

struct Pol1Row {
    bool disable_disallowed;
    bool delete_disallowed;
    bool delete_on_disable;
    std::string operation;
    std::string state;
    std::string outcome;
    std::size_t line;

    std::string describe() const {
        std::ostringstream out;
        out << disable_disallowed << delete_disallowed << delete_on_disable << " " << operation << " " << state;
        return out.str();
    }
};

inline std::vector<Pol1Row> load_pol1_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<Pol1Row> rows;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() != 6) throw std::runtime_error(path + ":" + std::to_string(n) + ": six columns expected");
        rows.push_back(Pol1Row{cells[0] == "1", cells[1] == "1", cells[2] == "1", cells[3], cells[4], cells[5], n});
    }
    return rows;
}

// Outcome predicted by the rule engine alone. Rows whose outcome comes from
// the card's state checks rather than POL1 map to the engine's verdict.
inline std::string engine_outcome(const Pol1Row& row) {
    policy::Pol1 p;
    try {
        p = policy::Pol1::make(row.disable_disallowed, row.delete_disallowed, row.delete_on_disable);
    } catch (const Error& e) {
        return e.code() == ErrorCode::ContradictoryRules ? "contradictory" : "error";
    }
    const auto state = row.state == "Enabled" ? policy::ProfileState::Enabled : policy::ProfileState::Disabled;
    if (row.operation == "disable") {
        if (state == policy::ProfileState::Disabled) return "not-enabled";
        const auto d = policy::check_disable(p);
        if (!d.allowed()) return "deny";
        return d.followup == policy::Followup::DeleteProfile ? "allow-delete" : "allow";
    }
    const auto d = policy::check_delete(p, state);
    if (state == policy::ProfileState::Enabled) return d.allowed() ? "allow" : "cannot-delete-enabled";
    return d.allowed() ? "allow" : "deny";
}

// Outcome observed on a card holding a profile with the row's rules.
inline std::string card_outcome(const Pol1Row& row, std::uint64_t seed) {
    const auto bits = static_cast<std::uint8_t>(row.disable_disallowed | (row.delete_disallowed << 1) |
                                                (row.delete_on_disable << 2));
    policy::Pol1 p;
    try {
        p = policy::Pol1::from_bits(bits);
    } catch (const Error& e) {
        return e.code() == ErrorCode::ContradictoryRules ? "contradictory" : "error";
    }
    CardDriver driver(seed);
    const auto aid = driver.install(p);
    if (row.state == "Enabled") driver.card().enable_profile(aid);

    const auto before = driver.card().snapshot();
    try {
        if (row.operation == "disable") {
            driver.card().disable_profile(aid);
        } else {
            driver.card().delete_profile(aid);
        }
    } catch (const Error& e) {
        if (driver.card().snapshot() != before) return "state changed on error";
        switch (e.code()) {
            case ErrorCode::PolicyDenied: return "deny";
            case ErrorCode::NotEnabled: return "not-enabled";
            case ErrorCode::CannotDeleteEnabled: return "cannot-delete-enabled";
            default: return "error " + std::string(to_string(e.code()));
        }
    }
    if (row.operation == "disable") return driver.card().find(aid) ? "allow" : "allow-delete";
    return driver.card().find(aid) ? "not deleted" : "allow";
}

}  // namespace esim::fixture
