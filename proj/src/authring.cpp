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

#include <keyauth/authring.hpp>

#include <boost/crc.hpp>

namespace keyauth {

namespace {

constexpr std::string_view magic = "MKAR";
constexpr std::size_t header_size = 4 + 1 + 1 + 4;
constexpr std::size_t trailer_size = 4;

using crc32c_type = boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true>;

} // namespace

std::uint32_t crc32c(ByteView data)
{
    crc32c_type crc;
    crc.process_bytes(data.data(), data.size());
    return crc.checksum();
}

std::string_view to_string(AuthMethod m)
{
    switch (m)
    {
        case AuthMethod::seen: return "seen";
        case AuthMethod::signature_verified: return "signature-verified";
        case AuthMethod::fingerprint_comparison: return "fingerprint-comparison";
    }
    return "unknown";
}

bool is_method_legal(KeyType ring_type, AuthMethod m)
{
    switch (m)
    {
        case AuthMethod::seen: return true;
        case AuthMethod::signature_verified: return is_signed_key_type(ring_type);
        case AuthMethod::fingerprint_comparison: return ring_type == KeyType::identity_ed25519;
    }
    return false;
}

std::string_view to_string(Comparison c)
{
    switch (c)
    {
        case Comparison::match: return "match";
        case Comparison::mismatch: return "mismatch";
        case Comparison::absent: return "absent";
    }
    return "unknown";
}

std::string_view to_string(ParseFailure f)
{
    switch (f)
    {
        case ParseFailure::bad_magic: return "bad-magic";
        case ParseFailure::bad_version: return "bad-version";
        case ParseFailure::bad_key_type: return "bad-key-type";
        case ParseFailure::truncated: return "truncated";
        case ParseFailure::checksum_mismatch: return "checksum-mismatch";
        case ParseFailure::duplicate_handle: return "duplicate-handle";
        case ParseFailure::unsorted: return "unsorted";
        case ParseFailure::bad_record: return "bad-record";
        case ParseFailure::trailing_data: return "trailing-data";
    }
    return "unknown";
}

FingerprintConflictError::FingerprintConflictError(std::string handle, const Fingerprint& tracked, const Fingerprint& offered)
    : Error(ErrorCode::fingerprint_conflict,
          "fingerprint conflict for " + handle + ": tracked " + tracked.hex() + ", offered " + offered.hex())
    , handle_(std::move(handle))
    , tracked_(tracked)
    , offered_(offered)
{
}

// --------------------------------------------------------------------

std::optional<AuthRecord> AuthRing::lookup(std::string_view handle) const
{
    auto i = records_.find(handle);
    if (i == records_.end())
        return std::nullopt;
    return i->second;
}

Comparison AuthRing::compare(std::string_view handle, const Fingerprint& fp) const
{
    auto i = records_.find(handle);
    if (i == records_.end())
        return Comparison::absent;
    return i->second.fingerprint == fp ? Comparison::match : Comparison::mismatch;
}

const AuthRecord& AuthRing::track(std::string_view handle, const Fingerprint& fp, AuthMethod method)
{
    require_valid_handle(handle);
    if (not is_method_legal(key_type_, method))
        throw Error(ErrorCode::illegal_method,
            std::string(to_string(method)) + " is not legal in the " + std::string(to_string(key_type_)) + " ring");

    auto i = records_.find(handle);
    if (i == records_.end())
        return records_.emplace(std::string(handle), AuthRecord{fp, method, 0}).first->second;

    auto& rec = i->second;
    if (rec.fingerprint != fp)
        throw FingerprintConflictError(std::string(handle), rec.fingerprint, fp);
    if (method > rec.method)
        rec.method = method;
    return rec;
}

void AuthRing::reset_record(std::string_view handle)
{
    auto i = records_.find(handle);
    if (i != records_.end())
        records_.erase(i);
}

void AuthRing::set_trust(std::string_view handle, std::uint8_t trust)
{
    if (trust > 15)
        throw Error(ErrorCode::parameter, "trust level must be 0..15");
    auto i = records_.find(handle);
    if (i == records_.end())
        throw Error(ErrorCode::missing_record, "no record for " + std::string(handle));
    i->second.trust = trust;
}

// --------------------------------------------------------------------

Bytes AuthRing::serialise() const
{
    Bytes out(magic.begin(), magic.end());
    out.push_back(format_version);
    out.push_back(tag(key_type_));
    put_u32_be(out, static_cast<std::uint32_t>(records_.size()));
    for (auto& [handle, rec] : records_)
    {
        out.push_back(static_cast<std::uint8_t>(handle.size()));
        out.insert(out.end(), handle.begin(), handle.end());
        out.insert(out.end(), rec.fingerprint.octets().begin(), rec.fingerprint.octets().end());
        out.push_back(static_cast<std::uint8_t>((rec.trust << 4) | static_cast<std::uint8_t>(rec.method)));
    }
    put_u32_be(out, crc32c(out));
    return out;
}

AuthRing AuthRing::deserialise(ByteView data)
{
    if (data.size() < header_size + trailer_size)
    {
        auto prefix = std::min(data.size(), magic.size());
        if (not std::equal(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(prefix), magic.begin()))
            throw ParseError(ParseFailure::bad_magic, "not an authentication ring");
        throw ParseError(ParseFailure::truncated, "authentication ring truncated");
    }

    // Checksum first, so any corruption of the body reports as such.
    auto body = data.first(data.size() - trailer_size);
    if (crc32c(body) != get_u32_be(data.last(trailer_size)))
        throw ParseError(ParseFailure::checksum_mismatch, "authentication ring checksum mismatch");

    if (not std::equal(magic.begin(), magic.end(), body.begin()))
        throw ParseError(ParseFailure::bad_magic, "not an authentication ring");
    if (body[4] != format_version)
        throw ParseError(ParseFailure::bad_version, "unsupported authentication ring version " + std::to_string(body[4]));
    auto type = key_type_from_tag(body[5]);
    if (not type)
        throw ParseError(ParseFailure::bad_key_type, "unknown key type tag " + std::to_string(body[5]));

    AuthRing ring(*type);
    std::uint32_t count = get_u32_be(body.subspan(6));
    auto rest = body.subspan(header_size);
    const std::string* previous = nullptr;

    for (std::uint32_t n = 0; n < count; ++n)
    {
        if (rest.empty())
            throw ParseError(ParseFailure::truncated, "authentication ring truncated");
        std::size_t len = rest[0];
        if (rest.size() < 1 + len + Fingerprint::size + 1)
            throw ParseError(ParseFailure::truncated, "authentication ring truncated");

        std::string handle(reinterpret_cast<const char*>(rest.data() + 1), len);
        auto fp = Fingerprint::from_octets(rest.subspan(1 + len, Fingerprint::size));
        std::uint8_t packed = rest[1 + len + Fingerprint::size];
        rest = rest.subspan(1 + len + Fingerprint::size + 1);

        if (not is_valid_handle(handle))
            throw ParseError(ParseFailure::bad_record, "invalid handle in authentication ring");
        auto method = static_cast<AuthMethod>(packed & 0x0f);
        if ((packed & 0x0f) > static_cast<std::uint8_t>(AuthMethod::fingerprint_comparison)
            or not is_method_legal(ring.key_type_, method))
            throw ParseError(ParseFailure::bad_record, "invalid authentication method for " + handle);

        if (previous)
        {
            if (*previous == handle)
                throw ParseError(ParseFailure::duplicate_handle, "duplicate handle " + handle);
            if (*previous > handle)
                throw ParseError(ParseFailure::unsorted, "records not sorted by handle");
        }
        auto it = ring.records_.emplace(std::move(handle), AuthRecord{fp, method, static_cast<std::uint8_t>(packed >> 4)}).first;
        previous = &it->first;
    }

    if (not rest.empty())
        throw ParseError(ParseFailure::trailing_data, "trailing data after authentication ring records");
    return ring;
}

} // namespace keyauth
