// Copyright 2026 The keyauth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Independent reference implementations used to check the library. None of
// these share code with it: SHA-256 is written out from FIPS 180-4, CRC32C is
// the bitwise reflected form, and the curve derivations go through OpenSSL
// rather than libsodium.

#include <keyauth/bytes.hpp>

#include <array>
#include <cstdint>

namespace keyauth::oracle {

std::array<std::uint8_t, 32> sha256(ByteView data);

/// First 20 octets of sha256(data).
std::array<std::uint8_t, 20> truncated_sha256(ByteView data);

std::uint32_t crc32c(ByteView data);

std::array<std::uint8_t, 32> ed25519_public_from_seed(ByteView seed);
std::array<std::uint8_t, 32> x25519_public_from_scalar(ByteView scalar);

/// Ed25519 verification through OpenSSL.
bool ed25519_verify(ByteView public_key, ByteView message, ByteView signature);

} // namespace keyauth::oracle
