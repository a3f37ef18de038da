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

/// \file crypto.hpp
/// Key pairs for the three key roles, fingerprints, and identity-key
/// attestation of sub-keys.
///
/// Ed25519, X25519 and SHA-256 come from libsodium, RSA from OpenSSL.

#include <keyauth/bytes.hpp>
#include <keyauth/error.hpp>

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace keyauth {

enum class KeyType : std::uint8_t
{
    identity_ed25519 = 0x00,
    chat_x25519 = 0x01,
    sharing_rsa = 0x02,
};

inline constexpr std::array<KeyType, 3> all_key_types{
    KeyType::identity_ed25519, KeyType::chat_x25519, KeyType::sharing_rsa};

constexpr std::uint8_t tag(KeyType t) { return static_cast<std::uint8_t>(t); }
std::optional<KeyType> key_type_from_tag(std::uint8_t tag);

/// Short names used on the command line and in file names: "ed25519", "x25519", "rsa".
std::string_view to_string(KeyType t);
std::optional<KeyType> key_type_from_string(std::string_view name);

constexpr bool is_signed_key_type(KeyType t) { return t != KeyType::identity_ed25519; }

// --------------------------------------------------------------------

/// Source of key material. Implementations return false when they cannot
/// deliver the requested octets.
class EntropySource
{
  public:
    virtual ~EntropySource() = default;
    virtual bool fill(std::span<std::uint8_t> out) = 0;
};

/// The operating system CSPRNG, via libsodium.
class SystemEntropy final : public EntropySource
{
  public:
    bool fill(std::span<std::uint8_t> out) override;
};

/// Reproducible ChaCha20 keystream. For tests and simulations only.
class DeterministicEntropy final : public EntropySource
{
  public:
    explicit DeterministicEntropy(std::uint64_t seed);
    bool fill(std::span<std::uint8_t> out) override;

  private:
    std::array<std::uint8_t, 32> key_{};
    std::uint64_t counter_ = 0;
};

EntropySource& system_entropy();

// --------------------------------------------------------------------

/// Most significant 160 bits of a SHA-256 digest.
class Fingerprint
{
  public:
    static constexpr std::size_t size = 20;

    Fingerprint() = default;
    explicit Fingerprint(const std::array<std::uint8_t, size>& digest)
        : digest_(digest)
    {
    }

    /// Throws Error(parameter) unless data is exactly 20 octets.
    static Fingerprint from_octets(ByteView data);
    /// Throws Error(parameter) unless hex is 40 hex digits (either case).
    static Fingerprint from_hex(std::string_view hex);

    const std::array<std::uint8_t, size>& octets() const { return digest_; }
    std::string hex() const;

    auto operator<=>(const Fingerprint&) const = default;

  private:
    std::array<std::uint8_t, size> digest_{};
};

std::string fingerprint_hex(const Fingerprint& fp);

/// "66687 aadf8 62bd7 ..." : eight groups of five, for reading aloud.
std::string fingerprint_grouped(const Fingerprint& fp);

/// EC public keys are hashed as their 32 raw octets.
Fingerprint fingerprint_ec(ByteView public_key);

/// RSA keys hash modulus ‖ exponent, both minimal big-endian.
Fingerprint fingerprint_rsa(ByteView modulus, ByteView exponent);

/// Fingerprint of a key's public octets as they travel through the store:
/// raw 32 octets for EC keys, the length-framed form for RSA.
Fingerprint fingerprint_public(KeyType type, ByteView public_octets);

// --------------------------------------------------------------------

struct RsaPublicKey
{
    Bytes modulus;
    Bytes exponent;

    bool operator==(const RsaPublicKey&) const = default;
};

/// u16 length ‖ n ‖ u16 length ‖ e. Both integers must be minimal and nonempty.
Bytes frame_rsa_public(ByteView modulus, ByteView exponent);
RsaPublicKey parse_rsa_public(ByteView framed);

class IdentityKeyPair
{
  public:
    static constexpr std::size_t key_size = 32;

    /// No consistency check; see check_keypair_consistency().
    IdentityKeyPair(ByteView seed, ByteView public_key);

    static IdentityKeyPair from_seed(ByteView seed);

    const std::array<std::uint8_t, key_size>& seed() const { return seed_; }
    const std::array<std::uint8_t, key_size>& public_key() const { return public_; }

    std::array<std::uint8_t, 64> sign(ByteView message) const;

    bool operator==(const IdentityKeyPair&) const = default;

  private:
    std::array<std::uint8_t, key_size> seed_{};
    std::array<std::uint8_t, key_size> public_{};
};

class ChatKeyPair
{
  public:
    static constexpr std::size_t key_size = 32;

    ChatKeyPair(ByteView scalar, ByteView public_key);

    /// The scalar is clamped before use.
    static ChatKeyPair from_scalar(ByteView scalar);

    const std::array<std::uint8_t, key_size>& scalar() const { return scalar_; }
    const std::array<std::uint8_t, key_size>& public_key() const { return public_; }

    bool operator==(const ChatKeyPair&) const = default;

  private:
    std::array<std::uint8_t, key_size> scalar_{};
    std::array<std::uint8_t, key_size> public_{};
};

class SharingKeyPair
{
  public:
    static constexpr unsigned modulus_bits = 2048;
    /// Largest block RSA-OAEP with SHA-256 accepts for a 2048-bit modulus.
    static constexpr std::size_t max_block = 190;

    /// All integers big-endian. n and e are normalised to minimal form.
    SharingKeyPair(Bytes modulus, Bytes exponent, Bytes private_exponent, Bytes prime_p, Bytes prime_q);

    const Bytes& modulus() const { return n_; }
    const Bytes& exponent() const { return e_; }
    const Bytes& private_exponent() const { return d_; }
    const Bytes& prime_p() const { return p_; }
    const Bytes& prime_q() const { return q_; }

    RsaPublicKey public_key() const { return {n_, e_}; }
    /// Framed form, see frame_rsa_public().
    Bytes public_octets() const { return frame_rsa_public(n_, e_); }

    /// RSA-OAEP (SHA-256). Blocks longer than max_block are rejected with Error(parameter).
    Bytes encrypt(ByteView block) const;
    /// Returns nullopt if the ciphertext does not decrypt under this key.
    std::optional<Bytes> decrypt(ByteView ciphertext) const;

    bool operator==(const SharingKeyPair&) const = default;

  private:
    Bytes n_, e_, d_, p_, q_;
};

IdentityKeyPair generate_identity_keypair(EntropySource& rng);
ChatKeyPair generate_chat_keypair(EntropySource& rng);

/// Only 2048 bits is supported. The prime search runs on OpenSSL's DRBG,
/// which is reseeded from rng first, so output is not reproducible from rng.
SharingKeyPair generate_sharing_keypair(EntropySource& rng, unsigned bits = SharingKeyPair::modulus_bits);

std::array<std::uint8_t, 32> derive_ed25519_public(ByteView seed);
std::array<std::uint8_t, 32> derive_x25519_public(ByteView scalar);

// --------------------------------------------------------------------

struct KeySignature
{
    std::array<std::uint8_t, 64> sig{};
    KeyType signed_key_type = KeyType::chat_x25519;

    bool operator==(const KeySignature&) const = default;
};

/// "MEGA_KEYAUTH_SIG" ‖ 0x00 ‖ type tag ‖ public_octets.
/// The identity type is rejected with Error(parameter): that key is never signed.
Bytes canonical_payload(KeyType type, ByteView public_octets);

KeySignature sign_public_key(const IdentityKeyPair& identity, KeyType type, ByteView public_octets);

/// Never throws for a bad signature, only for malformed lengths (Error(malformed_key)).
bool verify_key_signature(ByteView identity_public, KeyType type, ByteView public_octets, ByteView signature);

bool verify_key_signature(ByteView identity_public, KeyType type, ByteView public_octets, const KeySignature& signature);

bool check_keypair_consistency(const IdentityKeyPair& pair);
bool check_keypair_consistency(const ChatKeyPair& pair);
bool check_keypair_consistency(const SharingKeyPair& pair);

} // namespace keyauth
