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

namespace esim {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::OversizeData: return "OversizeData";
        case ErrorCode::Truncated: return "Truncated";
        case ErrorCode::MalformedLength: return "MalformedLength";
        case ErrorCode::UnknownStatusWord: return "UnknownStatusWord";
        case ErrorCode::WrongData: return "WrongData";
        case ErrorCode::SchemeMismatch: return "SchemeMismatch";
        case ErrorCode::InvalidKey: return "InvalidKey";
        case ErrorCode::BadCertificate: return "BadCertificate";
        case ErrorCode::ChallengeMismatch: return "ChallengeMismatch";
        case ErrorCode::BadSignature: return "BadSignature";
        case ErrorCode::StaleChallenge: return "StaleChallenge";
        case ErrorCode::EmptySecret: return "EmptySecret";
        case ErrorCode::TamperDetected: return "TamperDetected";
        case ErrorCode::ReplayDetected: return "ReplayDetected";
        case ErrorCode::CounterExhausted: return "CounterExhausted";
        case ErrorCode::ContradictoryRules: return "ContradictoryRules";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::NoKey: return "NoKey";
        case ErrorCode::PolicyDenied: return "PolicyDenied";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::NotPersonalized: return "NotPersonalized";
        case ErrorCode::CannotDeleteEnabled: return "CannotDeleteEnabled";
        case ErrorCode::FallbackAlreadySet: return "FallbackAlreadySet";
        case ErrorCode::ProfileEnabled: return "ProfileEnabled";
        case ErrorCode::NotEnabled: return "NotEnabled";
        case ErrorCode::NoFallbackTarget: return "NoFallbackTarget";
        case ErrorCode::SecurityStatus: return "SecurityStatus";
        case ErrorCode::EstablishmentFailed: return "EstablishmentFailed";
        case ErrorCode::WrongState: return "WrongState";
        case ErrorCode::DuplicateEid: return "DuplicateEid";
        case ErrorCode::UnknownEid: return "UnknownEid";
        case ErrorCode::IsdpCreationFailed: return "IsdpCreationFailed";
        case ErrorCode::KeyAgreementFailed: return "KeyAgreementFailed";
        case ErrorCode::InstallRejected: return "InstallRejected";
        case ErrorCode::CapabilityRefused: return "CapabilityRefused";
        case ErrorCode::Busy: return "Busy";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::UnknownActor: return "UnknownActor";
        case ErrorCode::LayeringViolation: return "LayeringViolation";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownStep: return "UnknownStep";
        case ErrorCode::DanglingReference: return "DanglingReference";
    }
    return "Unknown";
}

std::optional<ErrorCode> error_code_from_name(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(ErrorCode::DanglingReference); ++i) {
        const auto code = static_cast<ErrorCode>(i);
        if (to_string(code) == name) return code;
    }
    return std::nullopt;
}

}  // namespace esim
