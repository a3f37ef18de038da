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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace keyauth {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Lowercase hex, two characters per octet.
std::string to_hex(ByteView data);

/// Accepts upper- or lowercase digits. Returns nullopt on odd length or any non-hex character.
std::optional<Bytes> from_hex(std::string_view hex);

/// Standard alphabet, padded.
std::string to_base64(ByteView data);
std::optional<Bytes> from_base64(std::string_view text);

/// User handles are opaque, nonempty, valid UTF-8 and at most 255 octets long.
bool is_valid_handle(std::string_view handle);

/// Throws Error(ErrorCode::parameter) unless is_valid_handle(handle).
void require_valid_handle(std::string_view handle);

void put_u16_be(Bytes& out, std::uint16_t v);
void put_u32_be(Bytes& out, std::uint32_t v);
std::uint16_t get_u16_be(ByteView in);
std::uint32_t get_u32_be(ByteView in);

} // namespace keyauth
