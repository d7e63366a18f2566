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

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "esim/bytes.hpp"

namespace esim::crypto {

// Must be called before any libsodium primitive; idempotent and thread-safe.
void ensure_sodium();

class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        fill(out);
        return out;
    }
};

// Seeded ChaCha20 stream. Every fill() draws from a fresh block derived from
// (key, draw counter), so the sequence of outputs depends only on the seed,
// the stream label and the order of calls. Copies continue the same stream.
class DeterministicRandom final : public RandomSource {
public:
    DeterministicRandom(std::uint64_t seed, std::string_view stream);

    void fill(std::span<std::uint8_t> out) override;

    // Derives an independent child stream, e.g. one per actor.
    DeterministicRandom fork(std::string_view label);

    bool operator==(const DeterministicRandom&) const = default;

private:
    explicit DeterministicRandom(const std::array<std::uint8_t, 32>& key) : key_(key) {}

    std::array<std::uint8_t, 32> key_{};
    std::uint64_t draws_ = 0;
};

class SystemRandom final : public RandomSource {
public:
    void fill(std::span<std::uint8_t> out) override;
};

}  // namespace esim::crypto
