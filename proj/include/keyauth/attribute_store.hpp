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

/// \file attribute_store.hpp
/// A stand-in for the platform's public user attribute API.
///
/// Every request is counted so callers can assert round trips, and an
/// adversary can be configured to rewrite responses on the way out while the
/// stored values stay honest. Requests are serialised by an internal mutex.
///
/// When backed by a file the store is a JSON document:
///
///     {"users": {"<handle>": {"ed25519_pub": "<base64>",
///                             "rsa_pub": {"n": "<base64>", "e": "<base64>"}, ...}}}

#include <keyauth/bytes.hpp>
#include <keyauth/crypto.hpp>
#include <keyauth/error.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace keyauth {

enum class Attribute
{
    ed25519_pub,
    x25519_pub,
    rsa_pub,
    sig_x25519,
    sig_rsa,
};

inline constexpr std::array<Attribute, 5> all_attributes{
    Attribute::ed25519_pub, Attribute::x25519_pub, Attribute::rsa_pub, Attribute::sig_x25519, Attribute::sig_rsa};

std::string_view to_string(Attribute a);
std::optional<Attribute> attribute_from_string(std::string_view name);

/// The attribute holding the public key of the given type.
Attribute public_attribute(KeyType t);
/// The attribute holding the signature over a sub-key. Throws Error(parameter) for the identity type.
Attribute signature_attribute(KeyType t);

/// Throws Error(publish) unless value is well formed for the attribute:
/// 32 octets for EC keys, 64 for signatures, a framed (n, e) pair for RSA.
void validate_attribute_value(Attribute a, ByteView value);

enum class AdversaryMode
{
    none,
    substitute_key,
    strip_signature,
};

struct AdversaryConfig
{
    AdversaryMode mode = AdversaryMode::none;
    std::string handle;
    Attribute attribute = Attribute::ed25519_pub;
    /// Returned in place of the stored value for substitute_key.
    Bytes replacement;
};

struct StoreStats
{
    std::map<std::pair<std::string, Attribute>, std::uint64_t> fetches;
    std::uint64_t total_fetches = 0;
    std::uint64_t total_publishes = 0;

    std::uint64_t fetch_count(std::string_view handle, Attribute a) const;
};

class AttributeStore
{
  public:
    /// In-memory only.
    AttributeStore() = default;

    /// Loads path if it exists; every publish is written back to it.
    /// Throws Error(store_unavailable) if the file exists but cannot be read or parsed.
    explicit AttributeStore(std::filesystem::path path);

    AttributeStore(const AttributeStore&) = delete;
    AttributeStore& operator=(const AttributeStore&) = delete;

    /// Last writer wins. Throws Error(publish) for a malformed value or handle
    /// and Error(store_unavailable) if persisting fails.
    void publish(std::string_view handle, Attribute a, ByteView value);

    /// Counts one round trip whether or not a value is returned.
    std::optional<Bytes> fetch(std::string_view handle, Attribute a);

    /// The honestly stored value, bypassing the adversary and the counters.
    std::optional<Bytes> stored_value(std::string_view handle, Attribute a) const;

    StoreStats stats() const;
    void reset_stats();

    /// Rules accumulate; a later rule for the same (handle, attribute) wins.
    /// strip_signature is only accepted for signature attributes.
    void add_adversary(AdversaryConfig config);
    void clear_adversary();

    /// While unavailable, every request throws Error(store_unavailable).
    void set_available(bool available);

    void save(const std::filesystem::path& path) const;

    const std::optional<std::filesystem::path>& path() const { return path_; }

  private:
    using UserAttributes = std::map<Attribute, Bytes>;

    void check_available() const;
    void persist() const;

    mutable std::mutex mutex_;
    std::optional<std::filesystem::path> path_;
    std::map<std::string, UserAttributes, std::less<>> users_;
    std::vector<AdversaryConfig> adversary_;
    StoreStats stats_;
    bool available_ = true;
};

} // namespace keyauth
