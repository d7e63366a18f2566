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

#include "esim/subman/eis.hpp"

#include <array>
#include <istream>
#include <ostream>

#include "esim/error.hpp"

namespace esim::subman {

namespace {

constexpr std::array<std::string_view, 3> kStateNames{"Created", "Disabled", "Enabled"};

template <typename T>
T field(const nlohmann::json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw Error(ErrorCode::WrongData, std::string("EIS field missing: ") + name);
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::WrongData, std::string("EIS field has the wrong type: ") + name);
    }
}

EisProfileState state_of(const euicc::IsdP& isdp) {
    if (!isdp.profile) return EisProfileState::Created;
    return isdp.profile->state == policy::ProfileState::Enabled ? EisProfileState::Enabled
                                                                : EisProfileState::Disabled;
}

}  // namespace

std::string_view eis_state_name(EisProfileState s) { return kStateNames.at(static_cast<std::size_t>(s)); }

std::optional<EisProfileState> eis_state_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kStateNames.size(); ++i)
        if (kStateNames[i] == name) return static_cast<EisProfileState>(i);
    return std::nullopt;
}

const EisProfile* EisRecord::find(const Aid& aid) const {
    for (const auto& p : profiles)
        if (p.isdp_id == aid) return &p;
    return nullptr;
}

EisProfile* EisRecord::find(const Aid& aid) {
    for (auto& p : profiles)
        if (p.isdp_id == aid) return &p;
    return nullptr;
}

const EisProfile* EisRecord::enabled() const {
    for (const auto& p : profiles)
        if (p.state == EisProfileState::Enabled) return &p;
    return nullptr;
}

nlohmann::json EisRecord::to_json(bool include_secrets) const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : profiles) {
        list.push_back({{"isdp_id", to_hex(p.isdp_id)},
                        {"mno_id", p.mno_id},
                        {"state", eis_state_name(p.state)},
                        {"pol1", p.pol1_mirror.to_string()},
                        {"fallback", p.fallback}});
    }
    nlohmann::json j{{"eid", eid.hex()},
                     {"eum_id", eum_id},
                     {"production_date", production_date},
                     {"euicc_public_key", to_hex(euicc_public_key.bytes)},
                     {"euicc_certificate", to_hex(euicc_certificate.serialize())},
                     {"profiles", std::move(list)}};
    if (include_secrets) {
        j["k80"] = to_hex(k80.material());
    } else {
        j["k80_fingerprint"] = k80.fingerprint();
    }
    return j;
}

EisRecord EisRecord::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::WrongData, "EIS must be an object");
    auto certificate = crypto::Certificate::parse(from_hex(field<std::string>(j, "euicc_certificate")));
    crypto::PublicKey key{crypto::Scheme::KeyAgreement, from_hex(field<std::string>(j, "euicc_public_key"))};
    if (key != certificate.subject_key) throw Error(ErrorCode::WrongData, "EIS public key does not match certificate");

    EisRecord record{Eid::from_hex(field<std::string>(j, "eid")),
                     field<std::string>(j, "eum_id"),
                     field<std::string>(j, "production_date"),
                     std::move(key),
                     std::move(certificate),
                     crypto::SymmetricKey(from_hex(field<std::string>(j, "k80")), crypto::KeyRole::K80),
                     {}};
    const auto list = j.find("profiles");
    if (list == j.end() || !list->is_array()) throw Error(ErrorCode::WrongData, "EIS profile list missing");
    for (const auto& item : *list) {
        auto state = eis_state_from_name(field<std::string>(item, "state"));
        auto pol1 = Pol1::parse(field<std::string>(item, "pol1"));
        if (!state || !pol1) throw Error(ErrorCode::WrongData, "EIS profile entry is malformed");
        record.profiles.push_back(EisProfile{from_hex(field<std::string>(item, "isdp_id")),
                                             field<std::string>(item, "mno_id"), *state, *pol1,
                                             field<bool>(item, "fallback")});
    }
    return record;
}

EisRecord eis_from_seed(const euicc::EisSeed& seed) {
    EisRecord record{seed.eid,
                     seed.eum_id,
                     seed.production_date,
                     seed.euicc_certificate.subject_key,
                     seed.euicc_certificate,
                     seed.k80,
                     {}};
    record.profiles.push_back(
        EisProfile{seed.provisioning_aid, seed.provisioning_mno, EisProfileState::Enabled, Pol1{}, false});
    return record;
}

std::vector<EisProfile> card_view(const euicc::Euicc& card) {
    std::vector<EisProfile> out;
    for (const auto& [aid, isdp] : card.isdps()) {
        EisProfile p{aid, {}, state_of(isdp), {}, false};
        if (isdp.profile) {
            p.mno_id = isdp.profile->mno_id;
            p.pol1_mirror = isdp.profile->pol1;
            p.fallback = isdp.profile->fallback;
        }
        out.push_back(std::move(p));
    }
    return out;
}

bool eis_matches_card(const EisRecord& eis, const euicc::Euicc& card) {
    const auto view = card_view(card);
    if (view.size() != eis.profiles.size()) return false;
    for (const auto& p : view) {
        const auto* entry = eis.find(p.isdp_id);
        if (!entry || entry->state != p.state || entry->fallback != p.fallback) return false;
    }
    return true;
}

nlohmann::json EisTransfer::to_json() const {
    return {{"eis", record.to_json(true)}, {"send_counter", send_counter}, {"recv_counter", recv_counter}};
}

EisTransfer EisTransfer::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("eis")) throw Error(ErrorCode::WrongData, "malformed EIS transfer");
    return EisTransfer{EisRecord::from_json(j.at("eis")), field<std::uint64_t>(j, "send_counter"),
                       field<std::uint64_t>(j, "recv_counter")};
}

void save_registry(std::ostream& out, const std::vector<RegistryLine>& lines) {
    for (const auto& line : lines) out << nlohmann::json{{"smsr", line.smsr}, {"eis", line.eis.to_json(true)}}.dump() << '\n';
}

std::vector<RegistryLine> load_registry(std::istream& in) {
    std::vector<RegistryLine> out;
    std::string text;
    for (std::size_t number = 1; std::getline(in, text); ++number) {
        if (text.empty()) continue;
        try {
            auto j = nlohmann::json::parse(text, nullptr, false);
            if (j.is_discarded()) throw Error(ErrorCode::WrongData, "not JSON");
            out.push_back(RegistryLine{field<std::string>(j, "smsr"), EisRecord::from_json(j.at("eis"))});
        } catch (const Error& e) {
            throw Error(ErrorCode::WrongData, "registry line " + std::to_string(number) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::WrongData, "registry line " + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace esim::subman
