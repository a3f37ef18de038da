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

/// \file workflow.hpp
/// Loading contacts' public keys with authentication tracking, and
/// initialisation of one's own key pairs.
///
/// A Session is used by one actor at a time. Several sessions may share
/// one AttributeStore.

#include <keyauth/attribute_store.hpp>
#include <keyauth/authring.hpp>
#include <keyauth/crypto.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace keyauth {

/// Base for the alarm conditions raised while loading a contact's key.
class KeyAlarm : public Error
{
  public:
    KeyAlarm(ErrorCode code, const std::string& what, std::string handle, KeyType key_type)
        : Error(code, what)
        , handle_(std::move(handle))
        , key_type_(key_type)
    {
    }

    const std::string& handle() const { return handle_; }
    KeyType key_type() const { return key_type_; }

  private:
    std::string handle_;
    KeyType key_type_;
};

/// The fetched key differs from the pinned one and nothing vouches for the new key.
class FingerprintMismatchError : public KeyAlarm
{
  public:
    FingerprintMismatchError(std::string handle, KeyType key_type, const Fingerprint& tracked, const Fingerprint& observed);

    const Fingerprint& tracked() const { return tracked_; }
    const Fingerprint& observed() const { return observed_; }

  private:
    Fingerprint tracked_, observed_;
};

/// The fetched sub-key differs from the pinned one but carries a valid
/// signature by the contact's identity key. Accept with Session::reset_contact
/// followed by another load.
class KeyChangedWarning : public KeyAlarm
{
  public:
    KeyChangedWarning(std::string handle, KeyType key_type, const Fingerprint& tracked, const Fingerprint& observed);

    const Fingerprint& tracked() const { return tracked_; }
    const Fingerprint& observed() const { return observed_; }
    bool signature_verified() const { return true; }

  private:
    Fingerprint tracked_, observed_;
};

class SignatureInvalidError : public KeyAlarm
{
  public:
    SignatureInvalidError(std::string handle, KeyType key_type);
};

struct LoadedKey
{
    KeyType key_type;
    Bytes public_octets;
    /// The ring's method for the contact after the load.
    AuthMethod method;
    bool freshly_tracked = false;
};

/// One ring per key type.
struct RingSet
{
    AuthRing identity{KeyType::identity_ed25519};
    AuthRing chat{KeyType::chat_x25519};
    AuthRing sharing{KeyType::sharing_rsa};

    AuthRing& operator[](KeyType t);
    const AuthRing& operator[](KeyType t) const;

    bool operator==(const RingSet&) const = default;
};

struct OwnKeys
{
    IdentityKeyPair identity;
    ChatKeyPair chat;
    SharingKeyPair sharing;
};

class Session
{
  public:
    Session(std::shared_ptr<AttributeStore> store, std::string own_handle, RingSet rings = {},
        std::optional<OwnKeys> own_keys = std::nullopt);

    const std::string& own_handle() const { return own_handle_; }
    const std::optional<OwnKeys>& own_keys() const { return own_keys_; }
    AttributeStore& store() const { return *store_; }

    const RingSet& rings() const { return rings_; }
    const AuthRing& ring(KeyType t) const { return rings_[t]; }

    /// Fetches the contact's identity key and pins it as seen on first
    /// contact. Throws FingerprintMismatchError if it differs from the pinned
    /// key and Error(missing_key) if the contact has none.
    LoadedKey load_identity_key(std::string_view handle);

    /// Fetches a sub-key and authenticates it through its signature where
    /// one is published, falling back to seen tracking where none is.
    /// A verified, unchanged key costs one fetch.
    LoadedKey load_signed_key(std::string_view handle, KeyType key_type);

    /// load_identity_key or load_signed_key depending on key_type.
    LoadedKey load_key(std::string_view handle, KeyType key_type);

    /// Marks the tracked identity key as compared out of band if asserted_hex
    /// matches its fingerprint. Case and ASCII spaces are ignored.
    void verify_contact_fingerprint(std::string_view handle, std::string_view asserted_hex);

    /// Drops the pinned record so the next load starts afresh.
    void reset_contact(std::string_view handle, KeyType key_type);

  private:
    std::shared_ptr<AttributeStore> store_;
    std::string own_handle_;
    RingSet rings_;
    std::optional<OwnKeys> own_keys_;
};

// --------------------------------------------------------------------

enum class RepairKind
{
    generate_key,
    regenerate_key,
    rederive_public,
    publish_public,
    publish_signature,
};

std::string_view to_string(RepairKind k);

struct RepairAction
{
    RepairKind kind;
    KeyType key_type;

    bool operator==(const RepairAction&) const = default;
};

/// "publish-public x25519" etc.
std::string to_string(const RepairAction& a);

using RepairReport = std::vector<RepairAction>;

/// Private key material found locally. unreadable marks material that
/// exists but could not be decoded.
template <class Pair>
struct LocalKey
{
    std::optional<Pair> pair;
    bool unreadable = false;
};

struct InitRequest
{
    std::shared_ptr<AttributeStore> store;
    std::string own_handle;
    LocalKey<IdentityKeyPair> identity;
    LocalKey<ChatKeyPair> chat;
    LocalKey<SharingKeyPair> sharing;
    RingSet rings;
    /// Permit replacing the identity key pair. Without it a missing or
    /// unreadable identity key whose public half is already published is an
    /// init error, since a new identity invalidates every contact's pin.
    bool force_identity = false;
    EntropySource* rng = nullptr;
};

struct InitResult
{
    Session session;
    RepairReport report;
};

/// Loads or generates the three own key pairs, checks each for consistency,
/// and makes the store carry the matching public keys and valid sub-key
/// signatures. Writes only what is missing or wrong; each write is listed in
/// the report.
InitResult init_own_keys(InitRequest request);

/// Lowercase, unspaced form of a human-entered fingerprint. Throws Error(parameter)
/// unless the result is 40 hex digits.
std::string normalise_fingerprint_input(std::string_view text);

} // namespace keyauth
