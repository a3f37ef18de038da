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

/// \file authring.hpp
/// Authentication rings: per key type, the fingerprint and authentication
/// method tracked for each contact.
///
/// On-disk layout (all integers big-endian):
///
///     "MKAR" | 0x01 | key type tag | u32 record count
///     records sorted by handle octets, each:
///         u8 handle length | handle | 20 octet fingerprint | (trust << 4 | method)
///     u32 CRC32C over everything above

#include <keyauth/bytes.hpp>
#include <keyauth/crypto.hpp>
#include <keyauth/error.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace keyauth {

/// Ordered by strength.
enum class AuthMethod : std::uint8_t
{
    seen = 0x0,
    signature_verified = 0x1,
    fingerprint_comparison = 0x2,
};

/// "seen", "signature-verified", "fingerprint-comparison".
std::string_view to_string(AuthMethod m);

/// Fingerprint comparison is reserved for identity keys, signature
/// verification for the signed sub-keys. Seen is legal everywhere.
bool is_method_legal(KeyType ring_type, AuthMethod m);

struct AuthRecord
{
    Fingerprint fingerprint;
    AuthMethod method = AuthMethod::seen;
    /// Stored and round-tripped, never consulted.
    std::uint8_t trust = 0;

    bool operator==(const AuthRecord&) const = default;
};

enum class Comparison
{
    match,
    mismatch,
    absent
};

std::string_view to_string(Comparison c);

/// Raised by AuthRing::track when a handle is already pinned to a different fingerprint.
class FingerprintConflictError : public Error
{
  public:
    FingerprintConflictError(std::string handle, const Fingerprint& tracked, const Fingerprint& offered);

    const std::string& handle() const { return handle_; }
    const Fingerprint& tracked() const { return tracked_; }
    const Fingerprint& offered() const { return offered_; }

  private:
    std::string handle_;
    Fingerprint tracked_, offered_;
};

enum class ParseFailure
{
    bad_magic,
    bad_version,
    bad_key_type,
    truncated,
    checksum_mismatch,
    duplicate_handle,
    unsorted,
    bad_record,
    trailing_data,
};

std::string_view to_string(ParseFailure f);

class ParseError : public Error
{
  public:
    ParseError(ParseFailure failure, const std::string& what)
        : Error(ErrorCode::parse, what)
        , failure_(failure)
    {
    }

    ParseFailure failure() const { return failure_; }

  private:
    ParseFailure failure_;
};

class AuthRing
{
  public:
    static constexpr std::uint8_t format_version = 0x01;

    explicit AuthRing(KeyType key_type)
        : key_type_(key_type)
    {
    }

    KeyType key_type() const { return key_type_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    std::optional<AuthRecord> lookup(std::string_view handle) const;
    Comparison compare(std::string_view handle, const Fingerprint& fp) const;

    /// Pins fp for handle, or raises the stored method to max(stored, method).
    /// Throws FingerprintConflictError if a different fingerprint is pinned and
    /// Error(illegal_method) if method is not legal for this ring. The ring is
    /// unchanged whenever this throws.
    const AuthRecord& track(std::string_view handle, const Fingerprint& fp, AuthMethod method);

    /// Removes the record if present.
    void reset_record(std::string_view handle);

    /// Throws Error(missing_record) for an unknown handle and Error(parameter) for trust > 15.
    void set_trust(std::string_view handle, std::uint8_t trust);

    const std::map<std::string, AuthRecord, std::less<>>& records() const { return records_; }

    Bytes serialise() const;
    /// Throws ParseError.
    static AuthRing deserialise(ByteView data);

    bool operator==(const AuthRing&) const = default;

  private:
    KeyType key_type_;
    std::map<std::string, AuthRecord, std::less<>> records_;
};

/// CRC32C (Castagnoli), as used by the ring trailer.
std::uint32_t crc32c(ByteView data);

} // namespace keyauth
