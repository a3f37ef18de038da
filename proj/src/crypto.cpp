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

#include <keyauth/crypto.hpp>

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/rand.h>
#include <openssl/rsa.h>

#include <sodium.h>

#include <algorithm>
#include <memory>

namespace keyauth {

namespace {

void ensure_sodium()
{
    static const bool ok = sodium_init() >= 0;
    if (not ok)
        throw Error(ErrorCode::generation, "cannot initialise libsodium");
}

constexpr std::string_view signature_domain = "MEGA_KEYAUTH_SIG";

template <std::size_t N>
std::array<std::uint8_t, N> to_array(ByteView data)
{
    std::array<std::uint8_t, N> out{};
    std::copy(data.begin(), data.end(), out.begin());
    return out;
}

Bytes strip_leading_zeros(Bytes v)
{
    auto nz = std::find_if(v.begin(), v.end(), [](std::uint8_t b) { return b != 0; });
    v.erase(v.begin(), nz);
    return v;
}

std::array<std::uint8_t, 32> sha256(std::initializer_list<ByteView> parts)
{
    ensure_sodium();
    crypto_hash_sha256_state st;
    crypto_hash_sha256_init(&st);
    for (auto part : parts)
        crypto_hash_sha256_update(&st, part.data(), part.size());
    std::array<std::uint8_t, 32> digest{};
    crypto_hash_sha256_final(&st, digest.data());
    return digest;
}

Fingerprint truncate(const std::array<std::uint8_t, 32>& digest)
{
    std::array<std::uint8_t, Fingerprint::size> fp{};
    std::copy_n(digest.begin(), fp.size(), fp.begin());
    return Fingerprint(fp);
}

// -- OpenSSL plumbing ------------------------------------------------

struct BnFree
{
    void operator()(BIGNUM* bn) const { BN_clear_free(bn); }
};
struct PkeyFree
{
    void operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }
};
struct PkeyCtxFree
{
    void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
struct BnCtxFree
{
    void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct ParamBldFree
{
    void operator()(OSSL_PARAM_BLD* b) const { OSSL_PARAM_BLD_free(b); }
};
struct ParamFree
{
    void operator()(OSSL_PARAM* p) const { OSSL_PARAM_free(p); }
};

using BnPtr = std::unique_ptr<BIGNUM, BnFree>;
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyFree>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxFree>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxFree>;

BnPtr to_bn(ByteView v)
{
    return BnPtr(BN_bin2bn(v.data(), static_cast<int>(v.size()), nullptr));
}

Bytes from_bn(const BIGNUM* bn)
{
    Bytes out(static_cast<std::size_t>(BN_num_bytes(bn)));
    BN_bn2bin(bn, out.data());
    return out;
}

Bytes get_bn_param(EVP_PKEY* key, const char* name)
{
    BIGNUM* raw = nullptr;
    if (EVP_PKEY_get_bn_param(key, name, &raw) != 1)
        throw Error(ErrorCode::generation, std::string("cannot read RSA parameter ") + name);
    BnPtr bn(raw);
    return from_bn(bn.get());
}

PkeyPtr pkey_from_params(const std::vector<std::pair<const char*, const BIGNUM*>>& values, int selection)
{
    std::unique_ptr<OSSL_PARAM_BLD, ParamBldFree> bld(OSSL_PARAM_BLD_new());
    if (not bld)
        return nullptr;
    for (auto& [name, bn] : values)
        if (OSSL_PARAM_BLD_push_BN(bld.get(), name, bn) != 1)
            return nullptr;
    std::unique_ptr<OSSL_PARAM, ParamFree> params(OSSL_PARAM_BLD_to_param(bld.get()));
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
    if (not params or not ctx or EVP_PKEY_fromdata_init(ctx.get()) != 1)
        return nullptr;
    EVP_PKEY* raw = nullptr;
    if (EVP_PKEY_fromdata(ctx.get(), &raw, selection, params.get()) != 1)
        return nullptr;
    return PkeyPtr(raw);
}

bool set_oaep(EVP_PKEY_CTX* ctx)
{
    return EVP_PKEY_CTX_set_rsa_padding(ctx, RSA_PKCS1_OAEP_PADDING) == 1
        and EVP_PKEY_CTX_set_rsa_oaep_md(ctx, EVP_sha256()) == 1
        and EVP_PKEY_CTX_set_rsa_mgf1_md(ctx, EVP_sha256()) == 1;
}

} // namespace

// --------------------------------------------------------------------

std::optional<KeyType> key_type_from_tag(std::uint8_t t)
{
    switch (t)
    {
        case 0x00: return KeyType::identity_ed25519;
        case 0x01: return KeyType::chat_x25519;
        case 0x02: return KeyType::sharing_rsa;
        default: return std::nullopt;
    }
}

std::string_view to_string(KeyType t)
{
    switch (t)
    {
        case KeyType::identity_ed25519: return "ed25519";
        case KeyType::chat_x25519: return "x25519";
        case KeyType::sharing_rsa: return "rsa";
    }
    return "unknown";
}

std::optional<KeyType> key_type_from_string(std::string_view name)
{
    for (auto t : all_key_types)
        if (to_string(t) == name)
            return t;
    return std::nullopt;
}

// --------------------------------------------------------------------

bool SystemEntropy::fill(std::span<std::uint8_t> out)
{
    if (sodium_init() < 0)
        return false;
    randombytes_buf(out.data(), out.size());
    return true;
}

DeterministicEntropy::DeterministicEntropy(std::uint64_t seed)
{
    ensure_sodium();
    std::array<std::uint8_t, 8> s{};
    for (int i = 0; i < 8; ++i)
        s[i] = static_cast<std::uint8_t>(seed >> (8 * i));
    key_ = sha256({s});
}

bool DeterministicEntropy::fill(std::span<std::uint8_t> out)
{
    std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
    for (std::size_t i = 0; i < nonce.size(); ++i)
        nonce[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
    ++counter_;
    crypto_stream_chacha20(out.data(), out.size(), nonce.data(), key_.data());
    return true;
}

EntropySource& system_entropy()
{
    static SystemEntropy instance;
    return instance;
}

// --------------------------------------------------------------------

Fingerprint Fingerprint::from_octets(ByteView data)
{
    if (data.size() != size)
        throw Error(ErrorCode::parameter, "fingerprint must be 20 octets");
    return Fingerprint(to_array<size>(data));
}

Fingerprint Fingerprint::from_hex(std::string_view hex)
{
    auto octets = hex.size() == 2 * size ? keyauth::from_hex(hex) : std::nullopt;
    if (not octets)
        throw Error(ErrorCode::parameter, "fingerprint must be 40 hex characters");
    return from_octets(*octets);
}

std::string Fingerprint::hex() const
{
    return to_hex(digest_);
}

std::string fingerprint_hex(const Fingerprint& fp)
{
    return fp.hex();
}

std::string fingerprint_grouped(const Fingerprint& fp)
{
    auto hex = fp.hex();
    std::string out;
    for (std::size_t i = 0; i < hex.size(); i += 5)
    {
        if (i != 0)
            out.push_back(' ');
        out.append(hex, i, 5);
    }
    return out;
}

Fingerprint fingerprint_ec(ByteView public_key)
{
    if (public_key.size() != 32)
        throw Error(ErrorCode::malformed_key, "EC public key must be 32 octets");
    return truncate(sha256({public_key}));
}

Fingerprint fingerprint_rsa(ByteView modulus, ByteView exponent)
{
    if (modulus.empty() or modulus[0] == 0 or exponent.empty() or exponent[0] == 0)
        throw Error(ErrorCode::malformed_key, "RSA integers must be nonempty and minimal");
    return truncate(sha256({modulus, exponent}));
}

Fingerprint fingerprint_public(KeyType type, ByteView public_octets)
{
    if (type == KeyType::sharing_rsa)
    {
        auto key = parse_rsa_public(public_octets);
        return fingerprint_rsa(key.modulus, key.exponent);
    }
    return fingerprint_ec(public_octets);
}

// --------------------------------------------------------------------

Bytes frame_rsa_public(ByteView modulus, ByteView exponent)
{
    auto check = [](ByteView v) {
        if (v.empty() or v[0] == 0 or v.size() > 0xffff)
            throw Error(ErrorCode::malformed_key, "RSA integers must be nonempty and minimal");
    };
    check(modulus);
    check(exponent);

    Bytes out;
    out.reserve(4 + modulus.size() + exponent.size());
    put_u16_be(out, static_cast<std::uint16_t>(modulus.size()));
    out.insert(out.end(), modulus.begin(), modulus.end());
    put_u16_be(out, static_cast<std::uint16_t>(exponent.size()));
    out.insert(out.end(), exponent.begin(), exponent.end());
    return out;
}

RsaPublicKey parse_rsa_public(ByteView framed)
{
    auto take = [&framed]() {
        if (framed.size() < 2)
            throw Error(ErrorCode::malformed_key, "truncated RSA public key");
        std::size_t len = get_u16_be(framed);
        if (framed.size() < 2 + len)
            throw Error(ErrorCode::malformed_key, "truncated RSA public key");
        Bytes v(framed.begin() + 2, framed.begin() + 2 + static_cast<std::ptrdiff_t>(len));
        framed = framed.subspan(2 + len);
        if (v.empty() or v[0] == 0)
            throw Error(ErrorCode::malformed_key, "RSA integers must be nonempty and minimal");
        return v;
    };
    RsaPublicKey key;
    key.modulus = take();
    key.exponent = take();
    if (not framed.empty())
        throw Error(ErrorCode::malformed_key, "trailing octets after RSA public key");
    return key;
}

// --------------------------------------------------------------------

std::array<std::uint8_t, 32> derive_ed25519_public(ByteView seed)
{
    if (seed.size() != crypto_sign_SEEDBYTES)
        throw Error(ErrorCode::malformed_key, "Ed25519 seed must be 32 octets");
    ensure_sodium();
    std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk{};
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    crypto_sign_seed_keypair(pk.data(), sk.data(), seed.data());
    sodium_memzero(sk.data(), sk.size());
    return pk;
}

std::array<std::uint8_t, 32> derive_x25519_public(ByteView scalar)
{
    if (scalar.size() != crypto_scalarmult_SCALARBYTES)
        throw Error(ErrorCode::malformed_key, "X25519 scalar must be 32 octets");
    ensure_sodium();
    std::array<std::uint8_t, crypto_scalarmult_BYTES> pk{};
    if (crypto_scalarmult_base(pk.data(), scalar.data()) != 0)
        throw Error(ErrorCode::malformed_key, "X25519 scalar yields the identity point");
    return pk;
}

IdentityKeyPair::IdentityKeyPair(ByteView seed, ByteView public_key)
{
    if (seed.size() != key_size or public_key.size() != key_size)
        throw Error(ErrorCode::malformed_key, "Ed25519 key components must be 32 octets");
    seed_ = to_array<key_size>(seed);
    public_ = to_array<key_size>(public_key);
}

IdentityKeyPair IdentityKeyPair::from_seed(ByteView seed)
{
    auto pk = derive_ed25519_public(seed);
    return IdentityKeyPair(seed, pk);
}

std::array<std::uint8_t, 64> IdentityKeyPair::sign(ByteView message) const
{
    ensure_sodium();
    std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk{};
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    crypto_sign_seed_keypair(pk.data(), sk.data(), seed_.data());
    std::array<std::uint8_t, crypto_sign_BYTES> sig{};
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), sk.data());
    sodium_memzero(sk.data(), sk.size());
    return sig;
}

ChatKeyPair::ChatKeyPair(ByteView scalar, ByteView public_key)
{
    if (scalar.size() != key_size or public_key.size() != key_size)
        throw Error(ErrorCode::malformed_key, "X25519 key components must be 32 octets");
    scalar_ = to_array<key_size>(scalar);
    public_ = to_array<key_size>(public_key);
}

ChatKeyPair ChatKeyPair::from_scalar(ByteView scalar)
{
    if (scalar.size() != key_size)
        throw Error(ErrorCode::malformed_key, "X25519 scalar must be 32 octets");
    auto clamped = to_array<key_size>(scalar);
    clamped[0] &= 248;
    clamped[31] &= 127;
    clamped[31] |= 64;
    return ChatKeyPair(clamped, derive_x25519_public(clamped));
}

SharingKeyPair::SharingKeyPair(Bytes modulus, Bytes exponent, Bytes private_exponent, Bytes prime_p, Bytes prime_q)
    : n_(strip_leading_zeros(std::move(modulus)))
    , e_(strip_leading_zeros(std::move(exponent)))
    , d_(strip_leading_zeros(std::move(private_exponent)))
    , p_(strip_leading_zeros(std::move(prime_p)))
    , q_(strip_leading_zeros(std::move(prime_q)))
{
    if (n_.empty() or e_.empty() or d_.empty() or p_.empty() or q_.empty())
        throw Error(ErrorCode::malformed_key, "RSA key components must be nonzero");
}

Bytes SharingKeyPair::encrypt(ByteView block) const
{
    if (block.size() > max_block)
        throw Error(ErrorCode::parameter, "RSA-OAEP block too long");
    auto n = to_bn(n_);
    auto e = to_bn(e_);
    auto key = pkey_from_params({{OSSL_PKEY_PARAM_RSA_N, n.get()}, {OSSL_PKEY_PARAM_RSA_E, e.get()}},
        EVP_PKEY_PUBLIC_KEY);
    if (not key)
        throw Error(ErrorCode::malformed_key, "cannot load RSA public key");
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_pkey(nullptr, key.get(), nullptr));
    std::size_t len = 0;
    if (not ctx or EVP_PKEY_encrypt_init(ctx.get()) != 1 or not set_oaep(ctx.get())
        or EVP_PKEY_encrypt(ctx.get(), nullptr, &len, block.data(), block.size()) != 1)
        throw Error(ErrorCode::malformed_key, "RSA encryption failed");
    Bytes out(len);
    if (EVP_PKEY_encrypt(ctx.get(), out.data(), &len, block.data(), block.size()) != 1)
        throw Error(ErrorCode::malformed_key, "RSA encryption failed");
    out.resize(len);
    return out;
}

std::optional<Bytes> SharingKeyPair::decrypt(ByteView ciphertext) const
{
    auto n = to_bn(n_), e = to_bn(e_), d = to_bn(d_), p = to_bn(p_), q = to_bn(q_);
    BnPtr dp(BN_new()), dq(BN_new()), qinv(BN_new()), p1(BN_dup(p.get())), q1(BN_dup(q.get()));
    BnCtxPtr bnctx(BN_CTX_new());
    if (not dp or not dq or not qinv or not p1 or not q1 or not bnctx)
        return std::nullopt;
    BN_sub_word(p1.get(), 1);
    BN_sub_word(q1.get(), 1);
    if (BN_mod(dp.get(), d.get(), p1.get(), bnctx.get()) != 1 or BN_mod(dq.get(), d.get(), q1.get(), bnctx.get()) != 1
        or BN_mod_inverse(qinv.get(), q.get(), p.get(), bnctx.get()) == nullptr)
        return std::nullopt;

    auto key = pkey_from_params(
        {
            {OSSL_PKEY_PARAM_RSA_N, n.get()},
            {OSSL_PKEY_PARAM_RSA_E, e.get()},
            {OSSL_PKEY_PARAM_RSA_D, d.get()},
            {OSSL_PKEY_PARAM_RSA_FACTOR1, p.get()},
            {OSSL_PKEY_PARAM_RSA_FACTOR2, q.get()},
            {OSSL_PKEY_PARAM_RSA_EXPONENT1, dp.get()},
            {OSSL_PKEY_PARAM_RSA_EXPONENT2, dq.get()},
            {OSSL_PKEY_PARAM_RSA_COEFFICIENT1, qinv.get()},
        },
        EVP_PKEY_KEYPAIR);
    if (not key)
        return std::nullopt;

    PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_pkey(nullptr, key.get(), nullptr));
    std::size_t len = 0;
    if (not ctx or EVP_PKEY_decrypt_init(ctx.get()) != 1 or not set_oaep(ctx.get())
        or EVP_PKEY_decrypt(ctx.get(), nullptr, &len, ciphertext.data(), ciphertext.size()) != 1)
        return std::nullopt;
    Bytes out(len);
    if (EVP_PKEY_decrypt(ctx.get(), out.data(), &len, ciphertext.data(), ciphertext.size()) != 1)
        return std::nullopt;
    out.resize(len);
    return out;
}

// --------------------------------------------------------------------

IdentityKeyPair generate_identity_keypair(EntropySource& rng)
{
    std::array<std::uint8_t, 32> seed{};
    if (not rng.fill(seed))
        throw Error(ErrorCode::generation, "entropy source failed");
    auto pair = IdentityKeyPair::from_seed(seed);
    sodium_memzero(seed.data(), seed.size());
    return pair;
}

ChatKeyPair generate_chat_keypair(EntropySource& rng)
{
    std::array<std::uint8_t, 32> scalar{};
    if (not rng.fill(scalar))
        throw Error(ErrorCode::generation, "entropy source failed");
    auto pair = ChatKeyPair::from_scalar(scalar);
    sodium_memzero(scalar.data(), scalar.size());
    return pair;
}

SharingKeyPair generate_sharing_keypair(EntropySource& rng, unsigned bits)
{
    if (bits != SharingKeyPair::modulus_bits)
        throw Error(ErrorCode::parameter, "only 2048-bit RSA keys are supported");

    std::array<std::uint8_t, 32> extra{};
    if (not rng.fill(extra))
        throw Error(ErrorCode::generation, "entropy source failed");
    RAND_add(extra.data(), static_cast<int>(extra.size()), static_cast<double>(extra.size()));

    PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
    EVP_PKEY* raw = nullptr;
    if (not ctx or EVP_PKEY_keygen_init(ctx.get()) != 1 or EVP_PKEY_CTX_set_rsa_keygen_bits(ctx.get(), static_cast<int>(bits)) != 1
        or EVP_PKEY_generate(ctx.get(), &raw) != 1)
        throw Error(ErrorCode::generation, "RSA key generation failed");
    PkeyPtr key(raw);

    return SharingKeyPair(get_bn_param(key.get(), OSSL_PKEY_PARAM_RSA_N), get_bn_param(key.get(), OSSL_PKEY_PARAM_RSA_E),
        get_bn_param(key.get(), OSSL_PKEY_PARAM_RSA_D), get_bn_param(key.get(), OSSL_PKEY_PARAM_RSA_FACTOR1),
        get_bn_param(key.get(), OSSL_PKEY_PARAM_RSA_FACTOR2));
}

// --------------------------------------------------------------------

Bytes canonical_payload(KeyType type, ByteView public_octets)
{
    if (not is_signed_key_type(type))
        throw Error(ErrorCode::parameter, "the identity key is never signed");
    Bytes out(signature_domain.begin(), signature_domain.end());
    out.push_back(0x00);
    out.push_back(tag(type));
    out.insert(out.end(), public_octets.begin(), public_octets.end());
    return out;
}

KeySignature sign_public_key(const IdentityKeyPair& identity, KeyType type, ByteView public_octets)
{
    auto payload = canonical_payload(type, public_octets);
    return KeySignature{identity.sign(payload), type};
}

bool verify_key_signature(ByteView identity_public, KeyType type, ByteView public_octets, ByteView signature)
{
    if (identity_public.size() != crypto_sign_PUBLICKEYBYTES)
        throw Error(ErrorCode::malformed_key, "identity public key must be 32 octets");
    if (signature.size() != crypto_sign_BYTES)
        throw Error(ErrorCode::malformed_key, "signature must be 64 octets");
    auto payload = canonical_payload(type, public_octets);
    ensure_sodium();
    return crypto_sign_verify_detached(signature.data(), payload.data(), payload.size(), identity_public.data()) == 0;
}

bool verify_key_signature(ByteView identity_public, KeyType type, ByteView public_octets, const KeySignature& signature)
{
    if (signature.signed_key_type != type)
        return false;
    return verify_key_signature(identity_public, type, public_octets, ByteView(signature.sig));
}

bool check_keypair_consistency(const IdentityKeyPair& pair)
{
    return derive_ed25519_public(pair.seed()) == pair.public_key();
}

bool check_keypair_consistency(const ChatKeyPair& pair)
{
    try
    {
        return derive_x25519_public(pair.scalar()) == pair.public_key();
    }
    catch (const Error&)
    {
        return false;
    }
}

bool check_keypair_consistency(const SharingKeyPair& pair)
{
    auto n = to_bn(pair.modulus()), e = to_bn(pair.exponent()), p = to_bn(pair.prime_p()), q = to_bn(pair.prime_q());
    BnPtr pq(BN_new());
    BnCtxPtr bnctx(BN_CTX_new());
    if (not n or not e or not p or not q or not pq or not bnctx)
        return false;

    if (BN_num_bits(n.get()) != static_cast<int>(SharingKeyPair::modulus_bits))
        return false;
    if (not BN_is_odd(e.get()) or BN_cmp(e.get(), BN_value_one()) <= 0 or BN_cmp(e.get(), n.get()) >= 0)
        return false;
    if (BN_mul(pq.get(), p.get(), q.get(), bnctx.get()) != 1 or BN_cmp(pq.get(), n.get()) != 0)
        return false;

    const Bytes probe(SharingKeyPair::max_block, 0x5a);
    try
    {
        auto plain = pair.decrypt(pair.encrypt(probe));
        return plain and *plain == probe;
    }
    catch (const Error&)
    {
        return false;
    }
}

} // namespace keyauth
