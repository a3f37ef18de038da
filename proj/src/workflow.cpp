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

#include <keyauth/workflow.hpp>

#include <algorithm>
#include <cctype>

namespace keyauth {

FingerprintMismatchError::FingerprintMismatchError(
    std::string handle, KeyType key_type, const Fingerprint& tracked, const Fingerprint& observed)
    : KeyAlarm(ErrorCode::fingerprint_mismatch,
          "fingerprint mismatch on " + std::string(to_string(key_type)) + " key of " + handle + ": tracked "
              + tracked.hex() + ", received " + observed.hex(),
          handle, key_type)
    , tracked_(tracked)
    , observed_(observed)
{
}

KeyChangedWarning::KeyChangedWarning(
    std::string handle, KeyType key_type, const Fingerprint& tracked, const Fingerprint& observed)
    : KeyAlarm(ErrorCode::key_changed_warning,
          std::string(to_string(key_type)) + " key of " + handle + " changed: tracked " + tracked.hex()
              + ", received " + observed.hex() + " (new key carries a valid signature)",
          handle, key_type)
    , tracked_(tracked)
    , observed_(observed)
{
}

SignatureInvalidError::SignatureInvalidError(std::string handle, KeyType key_type)
    : KeyAlarm(ErrorCode::signature_invalid,
          "signature on " + std::string(to_string(key_type)) + " key of " + handle + " does not verify", handle,
          key_type)
{
}

AuthRing& RingSet::operator[](KeyType t)
{
    return const_cast<AuthRing&>(std::as_const(*this)[t]);
}

const AuthRing& RingSet::operator[](KeyType t) const
{
    switch (t)
    {
        case KeyType::identity_ed25519: return identity;
        case KeyType::chat_x25519: return chat;
        case KeyType::sharing_rsa: return sharing;
    }
    throw Error(ErrorCode::parameter, "unknown key type");
}

std::string normalise_fingerprint_input(std::string_view text)
{
    std::string out;
    for (char c : text)
    {
        if (c == ' ')
            continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (out.size() != 2 * Fingerprint::size
        or not std::all_of(out.begin(), out.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); }))
        throw Error(ErrorCode::parameter, "a fingerprint is 40 hexadecimal characters");
    return out;
}

// --------------------------------------------------------------------

Session::Session(std::shared_ptr<AttributeStore> store, std::string own_handle, RingSet rings, std::optional<OwnKeys> own_keys)
    : store_(std::move(store))
    , own_handle_(std::move(own_handle))
    , rings_(std::move(rings))
    , own_keys_(std::move(own_keys))
{
    if (not store_)
        throw Error(ErrorCode::parameter, "session needs an attribute store");
}

LoadedKey Session::load_identity_key(std::string_view handle)
{
    require_valid_handle(handle);
    auto value = store_->fetch(handle, Attribute::ed25519_pub);
    if (not value)
        throw KeyAlarm(ErrorCode::missing_key, "no identity key published for " + std::string(handle),
            std::string(handle), KeyType::identity_ed25519);

    auto fp = fingerprint_ec(*value);
    auto& ring = rings_.identity;
    if (auto rec = ring.lookup(handle))
    {
        if (rec->fingerprint != fp)
            throw FingerprintMismatchError(std::string(handle), KeyType::identity_ed25519, rec->fingerprint, fp);
        return {KeyType::identity_ed25519, std::move(*value), rec->method, false};
    }

    auto& rec = ring.track(handle, fp, AuthMethod::seen);
    return {KeyType::identity_ed25519, std::move(*value), rec.method, true};
}

LoadedKey Session::load_signed_key(std::string_view handle, KeyType key_type)
{
    if (not is_signed_key_type(key_type))
        throw Error(ErrorCode::parameter, "load_signed_key needs a sub-key type");
    require_valid_handle(handle);

    auto value = store_->fetch(handle, public_attribute(key_type));
    if (not value)
        throw KeyAlarm(ErrorCode::missing_key,
            "no " + std::string(to_string(key_type)) + " key published for " + std::string(handle),
            std::string(handle), key_type);

    auto fp = fingerprint_public(key_type, *value);
    auto& ring = rings_[key_type];
    auto tracked = ring.lookup(handle);
    auto comparison = ring.compare(handle, fp);

    if (comparison == Comparison::match and tracked->method == AuthMethod::signature_verified)
        return {key_type, std::move(*value), tracked->method, false};

    // Mismatching, untracked, or only seen: look for a signature.
    auto signature = store_->fetch(handle, signature_attribute(key_type));
    if (signature)
    {
        auto identity = load_identity_key(handle);
        bool valid = signature->size() == 64
            and verify_key_signature(identity.public_octets, key_type, *value, ByteView(*signature));
        if (not valid)
            throw SignatureInvalidError(std::string(handle), key_type);
        if (comparison == Comparison::mismatch)
            throw KeyChangedWarning(std::string(handle), key_type, tracked->fingerprint, fp);

        auto& rec = ring.track(handle, fp, AuthMethod::signature_verified);
        return {key_type, std::move(*value), rec.method, comparison == Comparison::absent};
    }

    // No signature published: treat like an unsigned key.
    switch (comparison)
    {
        case Comparison::match:
            return {key_type, std::move(*value), tracked->method, false};
        case Comparison::mismatch:
            throw FingerprintMismatchError(std::string(handle), key_type, tracked->fingerprint, fp);
        case Comparison::absent:
            break;
    }
    auto& rec = ring.track(handle, fp, AuthMethod::seen);
    return {key_type, std::move(*value), rec.method, true};
}

LoadedKey Session::load_key(std::string_view handle, KeyType key_type)
{
    if (key_type == KeyType::identity_ed25519)
        return load_identity_key(handle);
    return load_signed_key(handle, key_type);
}

void Session::verify_contact_fingerprint(std::string_view handle, std::string_view asserted_hex)
{
    auto asserted = normalise_fingerprint_input(asserted_hex);
    auto rec = rings_.identity.lookup(handle);
    if (not rec)
        throw Error(ErrorCode::missing_record, "identity key of " + std::string(handle) + " is not tracked");
    if (rec->fingerprint.hex() != asserted)
        throw Error(ErrorCode::comparison_failed,
            "fingerprint of " + std::string(handle) + " does not match: tracked " + rec->fingerprint.hex());
    rings_.identity.track(handle, rec->fingerprint, AuthMethod::fingerprint_comparison);
}

void Session::reset_contact(std::string_view handle, KeyType key_type)
{
    rings_[key_type].reset_record(handle);
}

// --------------------------------------------------------------------

std::string_view to_string(RepairKind k)
{
    switch (k)
    {
        case RepairKind::generate_key: return "generate-key";
        case RepairKind::regenerate_key: return "regenerate-key";
        case RepairKind::rederive_public: return "rederive-public";
        case RepairKind::publish_public: return "publish-public";
        case RepairKind::publish_signature: return "publish-signature";
    }
    return "unknown";
}

std::string to_string(const RepairAction& a)
{
    return std::string(to_string(a.kind)) + " " + std::string(to_string(a.key_type));
}

namespace {

struct Published
{
    std::optional<Bytes> values[all_attributes.size()];

    std::optional<Bytes>& operator[](Attribute a) { return values[static_cast<std::size_t>(a)]; }
};

} // namespace

InitResult init_own_keys(InitRequest request)
{
    if (not request.store)
        throw Error(ErrorCode::parameter, "init needs an attribute store");
    require_valid_handle(request.own_handle);

    auto& store = *request.store;
    auto& rng = request.rng ? *request.rng : system_entropy();
    RepairReport report;

    Published published;
    for (auto a : all_attributes)
        published[a] = store.fetch(request.own_handle, a);

    // Identity key pair.
    std::optional<IdentityKeyPair> identity;
    if (request.force_identity)
    {
        identity = generate_identity_keypair(rng);
        bool had = request.identity.pair or request.identity.unreadable or published[Attribute::ed25519_pub];
        report.push_back({had ? RepairKind::regenerate_key : RepairKind::generate_key, KeyType::identity_ed25519});
    }
    else if (request.identity.pair)
    {
        identity = *request.identity.pair;
        if (not check_keypair_consistency(*identity))
        {
            identity = IdentityKeyPair::from_seed(identity->seed());
            report.push_back({RepairKind::rederive_public, KeyType::identity_ed25519});
        }
    }
    else if (request.identity.unreadable)
        throw Error(ErrorCode::init, "identity private key is unreadable; replacing it requires force");
    else if (published[Attribute::ed25519_pub])
        throw Error(ErrorCode::init, "identity private key is missing but a public identity key is published; "
                                     "replacing it requires force");
    else
    {
        identity = generate_identity_keypair(rng);
        report.push_back({RepairKind::generate_key, KeyType::identity_ed25519});
    }

    // Chat key pair. The scalar is authoritative whenever it is usable.
    std::optional<ChatKeyPair> chat;
    if (request.chat.pair)
    {
        chat = *request.chat.pair;
        if (not check_keypair_consistency(*chat))
        {
            try
            {
                chat = ChatKeyPair::from_scalar(chat->scalar());
                report.push_back({RepairKind::rederive_public, KeyType::chat_x25519});
            }
            catch (const Error&)
            {
                chat = generate_chat_keypair(rng);
                report.push_back({RepairKind::regenerate_key, KeyType::chat_x25519});
            }
        }
    }
    else
    {
        chat = generate_chat_keypair(rng);
        report.push_back({request.chat.unreadable ? RepairKind::regenerate_key : RepairKind::generate_key,
            KeyType::chat_x25519});
    }

    // Sharing key pair. An inconsistent RSA pair cannot be trusted in any part.
    std::optional<SharingKeyPair> sharing;
    if (request.sharing.pair and check_keypair_consistency(*request.sharing.pair))
        sharing = *request.sharing.pair;
    else
    {
        sharing = generate_sharing_keypair(rng);
        bool had = request.sharing.pair or request.sharing.unreadable;
        report.push_back({had ? RepairKind::regenerate_key : RepairKind::generate_key, KeyType::sharing_rsa});
    }

    // Public keys.
    const Bytes publics[] = {
        Bytes(identity->public_key().begin(), identity->public_key().end()),
        Bytes(chat->public_key().begin(), chat->public_key().end()),
        sharing->public_octets(),
    };
    for (auto t : all_key_types)
    {
        auto a = public_attribute(t);
        auto& local = publics[tag(t)];
        if (published[a] != local)
        {
            store.publish(request.own_handle, a, local);
            report.push_back({RepairKind::publish_public, t});
        }
    }

    // Sub-key signatures, checked against the local identity key.
    for (auto t : {KeyType::chat_x25519, KeyType::sharing_rsa})
    {
        auto a = signature_attribute(t);
        auto& sig = published[a];
        auto& local = publics[tag(t)];
        bool valid = sig and sig->size() == 64
            and verify_key_signature(identity->public_key(), t, local, ByteView(*sig));
        if (not valid)
        {
            auto fresh = sign_public_key(*identity, t, local);
            store.publish(request.own_handle, a, fresh.sig);
            report.push_back({RepairKind::publish_signature, t});
        }
    }

    Session session(request.store, request.own_handle, std::move(request.rings),
        OwnKeys{std::move(*identity), std::move(*chat), std::move(*sharing)});
    return {std::move(session), std::move(report)};
}

} // namespace keyauth
