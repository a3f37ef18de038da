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

#include <keyauth/attribute_store.hpp>

#include <json.hpp>

#include <fstream>

namespace keyauth {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(Attribute a)
{
    switch (a)
    {
        case Attribute::ed25519_pub: return "ed25519_pub";
        case Attribute::x25519_pub: return "x25519_pub";
        case Attribute::rsa_pub: return "rsa_pub";
        case Attribute::sig_x25519: return "sig_x25519";
        case Attribute::sig_rsa: return "sig_rsa";
    }
    return "unknown";
}

std::optional<Attribute> attribute_from_string(std::string_view name)
{
    for (auto a : all_attributes)
        if (to_string(a) == name)
            return a;
    return std::nullopt;
}

Attribute public_attribute(KeyType t)
{
    switch (t)
    {
        case KeyType::identity_ed25519: return Attribute::ed25519_pub;
        case KeyType::chat_x25519: return Attribute::x25519_pub;
        case KeyType::sharing_rsa: return Attribute::rsa_pub;
    }
    throw Error(ErrorCode::parameter, "unknown key type");
}

Attribute signature_attribute(KeyType t)
{
    switch (t)
    {
        case KeyType::chat_x25519: return Attribute::sig_x25519;
        case KeyType::sharing_rsa: return Attribute::sig_rsa;
        default: throw Error(ErrorCode::parameter, "the identity key has no signature attribute");
    }
}

void validate_attribute_value(Attribute a, ByteView value)
{
    switch (a)
    {
        case Attribute::ed25519_pub:
        case Attribute::x25519_pub:
            if (value.size() != 32)
                throw Error(ErrorCode::publish, std::string(to_string(a)) + " must be 32 octets");
            break;
        case Attribute::sig_x25519:
        case Attribute::sig_rsa:
            if (value.size() != 64)
                throw Error(ErrorCode::publish, std::string(to_string(a)) + " must be 64 octets");
            break;
        case Attribute::rsa_pub:
            try
            {
                parse_rsa_public(value);
            }
            catch (const Error& e)
            {
                throw Error(ErrorCode::publish, std::string("rsa_pub: ") + e.what());
            }
            break;
    }
}

std::uint64_t StoreStats::fetch_count(std::string_view handle, Attribute a) const
{
    auto i = fetches.find({std::string(handle), a});
    return i == fetches.end() ? 0 : i->second;
}

// --------------------------------------------------------------------

namespace {

Bytes decode_field(const json& j, std::string_view what)
{
    if (not j.is_string())
        throw Error(ErrorCode::store_unavailable, "store file: " + std::string(what) + " is not a string");
    auto v = from_base64(j.get<std::string>());
    if (not v)
        throw Error(ErrorCode::store_unavailable, "store file: " + std::string(what) + " is not valid base64");
    return *v;
}

template <class Users>
json to_json(const Users& users)
{
    json doc{{"users", json::object()}};
    for (auto& [handle, attrs] : users)
    {
        json user = json::object();
        for (auto& [a, value] : attrs)
        {
            if (a == Attribute::rsa_pub)
            {
                auto key = parse_rsa_public(value);
                user[std::string(to_string(a))] = {{"n", to_base64(key.modulus)}, {"e", to_base64(key.exponent)}};
            }
            else
                user[std::string(to_string(a))] = to_base64(value);
        }
        doc["users"][handle] = std::move(user);
    }
    return doc;
}

template <class Users>
void write_file(const Users& users, const fs::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (not out)
            throw Error(ErrorCode::store_unavailable, "cannot write store file " + tmp.string());
        out << to_json(users).dump(2) << '\n';
        if (not out.flush())
            throw Error(ErrorCode::store_unavailable, "cannot write store file " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorCode::store_unavailable, "cannot replace store file " + path.string() + ": " + ec.message());
}

} // namespace

AttributeStore::AttributeStore(fs::path path)
    : path_(std::move(path))
{
    std::error_code ec;
    if (not fs::exists(*path_, ec))
        return;

    std::ifstream in(*path_, std::ios::binary);
    if (not in)
        throw Error(ErrorCode::store_unavailable, "cannot read store file " + path_->string());

    json doc;
    try
    {
        doc = json::parse(in);
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::store_unavailable, "store file " + path_->string() + " is not valid JSON: " + e.what());
    }
    if (not doc.is_object() or not doc.contains("users") or not doc["users"].is_object())
        throw Error(ErrorCode::store_unavailable, "store file lacks a \"users\" object");

    for (auto& [handle, attrs] : doc["users"].items())
    {
        if (not is_valid_handle(handle) or not attrs.is_object())
            throw Error(ErrorCode::store_unavailable, "store file: bad user entry");
        auto& user = users_[handle];
        for (auto& [name, value] : attrs.items())
        {
            auto a = attribute_from_string(name);
            if (not a)
                throw Error(ErrorCode::store_unavailable, "store file: unknown attribute " + name);
            Bytes octets;
            if (*a == Attribute::rsa_pub)
            {
                if (not value.is_object() or not value.contains("n") or not value.contains("e"))
                    throw Error(ErrorCode::store_unavailable, "store file: rsa_pub needs n and e");
                try
                {
                    octets = frame_rsa_public(decode_field(value["n"], "rsa_pub.n"), decode_field(value["e"], "rsa_pub.e"));
                }
                catch (const Error& e)
                {
                    throw Error(ErrorCode::store_unavailable, std::string("store file: ") + e.what());
                }
            }
            else
                octets = decode_field(value, name);
            try
            {
                validate_attribute_value(*a, octets);
            }
            catch (const Error& e)
            {
                throw Error(ErrorCode::store_unavailable, std::string("store file: ") + e.what());
            }
            user[*a] = std::move(octets);
        }
    }
}

void AttributeStore::check_available() const
{
    if (not available_)
        throw Error(ErrorCode::store_unavailable, "attribute store unavailable");
}

void AttributeStore::persist() const
{
    if (path_)
        write_file(users_, *path_);
}

void AttributeStore::publish(std::string_view handle, Attribute a, ByteView value)
{
    if (not is_valid_handle(handle))
        throw Error(ErrorCode::publish, "invalid user handle");
    validate_attribute_value(a, value);

    std::lock_guard lock(mutex_);
    check_available();
    auto& user = users_[std::string(handle)];
    auto previous = user.find(a) == user.end() ? std::nullopt : std::optional<Bytes>(user[a]);
    user[a] = Bytes(value.begin(), value.end());
    try
    {
        persist();
    }
    catch (...)
    {
        if (previous)
            user[a] = std::move(*previous);
        else
            user.erase(a);
        throw;
    }
    ++stats_.total_publishes;
}

std::optional<Bytes> AttributeStore::fetch(std::string_view handle, Attribute a)
{
    std::lock_guard lock(mutex_);
    check_available();
    ++stats_.fetches[{std::string(handle), a}];
    ++stats_.total_fetches;

    for (auto rule = adversary_.rbegin(); rule != adversary_.rend(); ++rule)
    {
        if (rule->handle != handle or rule->attribute != a)
            continue;
        if (rule->mode == AdversaryMode::substitute_key)
            return rule->replacement;
        if (rule->mode == AdversaryMode::strip_signature)
            return std::nullopt;
        break;
    }

    auto user = users_.find(handle);
    if (user == users_.end())
        return std::nullopt;
    auto value = user->second.find(a);
    if (value == user->second.end())
        return std::nullopt;
    return value->second;
}

std::optional<Bytes> AttributeStore::stored_value(std::string_view handle, Attribute a) const
{
    std::lock_guard lock(mutex_);
    auto user = users_.find(handle);
    if (user == users_.end())
        return std::nullopt;
    auto value = user->second.find(a);
    if (value == user->second.end())
        return std::nullopt;
    return value->second;
}

StoreStats AttributeStore::stats() const
{
    std::lock_guard lock(mutex_);
    return stats_;
}

void AttributeStore::reset_stats()
{
    std::lock_guard lock(mutex_);
    stats_ = {};
}

void AttributeStore::add_adversary(AdversaryConfig config)
{
    if (config.mode == AdversaryMode::strip_signature and config.attribute != Attribute::sig_x25519
        and config.attribute != Attribute::sig_rsa)
        throw Error(ErrorCode::parameter, "strip_signature targets a signature attribute");
    std::lock_guard lock(mutex_);
    adversary_.push_back(std::move(config));
}

void AttributeStore::clear_adversary()
{
    std::lock_guard lock(mutex_);
    adversary_.clear();
}

void AttributeStore::set_available(bool available)
{
    std::lock_guard lock(mutex_);
    available_ = available;
}

void AttributeStore::save(const fs::path& path) const
{
    std::lock_guard lock(mutex_);
    write_file(users_, path);
}

} // namespace keyauth
