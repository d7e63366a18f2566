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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace esim {

enum class ErrorCode : std::uint8_t {
    // codec
    OversizeData,
    Truncated,
    MalformedLength,
    UnknownStatusWord,
    WrongData,
    // crypto
    SchemeMismatch,
    InvalidKey,
    BadCertificate,
    ChallengeMismatch,
    BadSignature,
    StaleChallenge,
    EmptySecret,
    TamperDetected,
    ReplayDetected,
    CounterExhausted,
    // policy
    ContradictoryRules,
    // card
    DuplicateId,
    NoKey,
    PolicyDenied,
    NotFound,
    NotPersonalized,
    CannotDeleteEnabled,
    FallbackAlreadySet,
    ProfileEnabled,
    NotEnabled,
    NoFallbackTarget,
    SecurityStatus,
    EstablishmentFailed,
    WrongState,
    // off-card actors
    DuplicateEid,
    UnknownEid,
    IsdpCreationFailed,
    KeyAgreementFailed,
    InstallRejected,
    CapabilityRefused,
    Busy,
    Timeout,
    // network
    UnknownActor,
    LayeringViolation,
    // scenarios
    SyntaxError,
    UnknownStep,
    DanglingReference,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_name(std::string_view name);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    explicit Error(ErrorCode code) : Error(code, std::string(to_string(code))) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace esim
