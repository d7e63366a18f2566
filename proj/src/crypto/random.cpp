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

#include "esim/crypto/random.hpp"

#include <mutex>
#include <stdexcept>

#include <sodium.h>

namespace esim::crypto {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
    });
}

DeterministicRandom::DeterministicRandom(std::uint64_t seed, std::string_view stream) {
    ensure_sodium();
    Bytes material;
    put_u64(material, seed);
    append(material, to_bytes(stream));
    crypto_generichash(key_.data(), key_.size(), material.data(), material.size(), nullptr, 0);
}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
    Bytes block;
    put_u64(block, draws_++);
    std::array<std::uint8_t, randombytes_SEEDBYTES> seed{};
    crypto_generichash(seed.data(), seed.size(), block.data(), block.size(), key_.data(), key_.size());
    randombytes_buf_deterministic(out.data(), out.size(), seed.data());
}

DeterministicRandom DeterministicRandom::fork(std::string_view label) {
    Bytes material = to_bytes("fork:");
    append(material, to_bytes(label));
    std::array<std::uint8_t, 32> child{};
    crypto_generichash(child.data(), child.size(), material.data(), material.size(), key_.data(), key_.size());
    return DeterministicRandom(child);
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
    ensure_sodium();
    randombytes_buf(out.data(), out.size());
}

}  // namespace esim::crypto
