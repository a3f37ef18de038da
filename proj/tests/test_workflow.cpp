#include "test_keys.hpp"

#include <keyauth/workflow.hpp>

#include <gtest/gtest.h>

#include <functional>

using namespace keyauth;
using keyauth::test::rsa_pair;
using keyauth::test::to_bytes;

namespace {

/// Initialises a user with a shared RSA pair so tests avoid key generation.
InitResult init_user(std::shared_ptr<AttributeStore> store, const std::string& handle, std::uint64_t seed,
    std::size_t rsa_index = 0)
{
    DeterministicEntropy rng(seed);
    InitRequest req;
    req.store = std::move(store);
    req.own_handle = handle;
    req.sharing.pair = rsa_pair(rsa_index);
    req.rng = &rng;
    return init_own_keys(std::move(req));
}

InitRequest reinit_request(const InitResult& previous, EntropySource& rng)
{
    auto& keys = *previous.session.own_keys();
    InitRequest req;
    req.store = std::shared_ptr<AttributeStore>(&previous.session.store(), [](AttributeStore*) {});
    req.own_handle = previous.session.own_handle();
    req.identity.pair = keys.identity;
    req.chat.pair = keys.chat;
    req.sharing.pair = keys.sharing;
    req.rng = &rng;
    return req;
}

std::vector<std::optional<Bytes>> snapshot(const AttributeStore& store, const std::string& handle)
{
    std::vector<std::optional<Bytes>> out;
    for (auto a : all_attributes)
        out.push_back(store.stored_value(handle, a));
    return out;
}

ErrorCode code_of(const std::function<void()>& f)
{
    try
    {
        f();
    }
    catch (const Error& e)
    {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::parameter;
}

class Contacts : public ::testing::Test
{
  protected:
    void SetUp() override
    {
        store = std::make_shared<AttributeStore>();
        bob = std::make_unique<InitResult>(init_user(store, "bob", 1));
        alice = std::make_unique<Session>(store, "alice");
        store->reset_stats();
    }

    std::uint64_t fetches() const { return store->stats().total_fetches; }

    const OwnKeys& bob_keys() const { return *bob->session.own_keys(); }

    std::shared_ptr<AttributeStore> store;
    std::unique_ptr<InitResult> bob;
    std::unique_ptr<Session> alice;
};

} // namespace

TEST(FingerprintInput, Normalisation)
{
    auto hex = std::string("66687aadf862bd776c8fc18b8e9f8e2008971485");
    EXPECT_EQ(normalise_fingerprint_input("66687 AADF8 62bd7 76C8F c18b8 e9f8e 20089 71485"), hex);
    EXPECT_THROW(normalise_fingerprint_input(hex.substr(1)), Error);
    EXPECT_THROW(normalise_fingerprint_input(hex.substr(1) + "g"), Error);
    EXPECT_THROW(normalise_fingerprint_input(hex + "\t"), Error);
}

TEST_F(Contacts, FirstIdentityLoadTracksSeen)
{
    auto key = alice->load_identity_key("bob");
    EXPECT_EQ(key.method, AuthMethod::seen);
    EXPECT_TRUE(key.freshly_tracked);
    EXPECT_EQ(key.public_octets, to_bytes(bob_keys().identity.public_key()));
    EXPECT_EQ(fetches(), 1u);
    EXPECT_EQ(alice->ring(KeyType::identity_ed25519).lookup("bob")->fingerprint,
        fingerprint_ec(bob_keys().identity.public_key()));
}

TEST_F(Contacts, SecondIdentityLoadIsOneFetch)
{
    alice->load_identity_key("bob");
    store->reset_stats();
    auto key = alice->load_identity_key("bob");
    EXPECT_EQ(key.method, AuthMethod::seen);
    EXPECT_FALSE(key.freshly_tracked);
    EXPECT_EQ(fetches(), 1u);
}

TEST_F(Contacts, SubstitutedIdentityAfterContactIsMismatch)
{
    alice->load_identity_key("bob");
    auto rings = alice->rings();
    auto forged = generate_identity_keypair(system_entropy());
    store->add_adversary({AdversaryMode::substitute_key, "bob", Attribute::ed25519_pub, to_bytes(forged.public_key())});
    try
    {
        alice->load_identity_key("bob");
        FAIL();
    }
    catch (const FingerprintMismatchError& e)
    {
        EXPECT_EQ(e.tracked(), fingerprint_ec(bob_keys().identity.public_key()));
        EXPECT_EQ(e.observed(), fingerprint_ec(forged.public_key()));
        EXPECT_EQ(e.handle(), "bob");
    }
    EXPECT_EQ(alice->rings(), rings);
}

TEST_F(Contacts, MissingKey)
{
    EXPECT_EQ(code_of([&] { alice->load_identity_key("carol"); }), ErrorCode::missing_key);
    EXPECT_EQ(code_of([&] { alice->load_signed_key("carol", KeyType::chat_x25519); }), ErrorCode::missing_key);
    EXPECT_EQ(code_of([&] { alice->load_signed_key("bob", KeyType::identity_ed25519); }), ErrorCode::parameter);
    EXPECT_TRUE(alice->ring(KeyType::identity_ed25519).empty());
}

TEST_F(Contacts, FirstSignedLoadTakesThreeFetches)
{
    for (auto t : {KeyType::chat_x25519, KeyType::sharing_rsa})
    {
        store->reset_stats();
        auto key = alice->load_signed_key("bob", t);
        EXPECT_EQ(key.method, AuthMethod::signature_verified);
        EXPECT_TRUE(key.freshly_tracked);
        EXPECT_LE(fetches(), 3u);
    }
    // The first load also pinned the identity key; the second reused the pin.
    EXPECT_EQ(alice->ring(KeyType::identity_ed25519).lookup("bob")->method, AuthMethod::seen);
}

TEST_F(Contacts, FirstSignedLoadWithUntrackedIdentityIsExactlyThree)
{
    alice->load_signed_key("bob", KeyType::chat_x25519);
    auto stats = store->stats();
    EXPECT_EQ(stats.total_fetches, 3u);
    EXPECT_EQ(stats.fetch_count("bob", Attribute::x25519_pub), 1u);
    EXPECT_EQ(stats.fetch_count("bob", Attribute::sig_x25519), 1u);
    EXPECT_EQ(stats.fetch_count("bob", Attribute::ed25519_pub), 1u);
}

TEST_F(Contacts, VerifiedReloadInLaterSessionIsOneFetch)
{
    alice->load_signed_key("bob", KeyType::sharing_rsa);
    Session later(store, "alice", alice->rings());
    store->reset_stats();
    auto key = later.load_signed_key("bob", KeyType::sharing_rsa);
    EXPECT_EQ(key.method, AuthMethod::signature_verified);
    EXPECT_EQ(key.public_octets, bob_keys().sharing.public_octets());
    EXPECT_EQ(fetches(), 1u);
    EXPECT_EQ(store->stats().fetch_count("bob", Attribute::rsa_pub), 1u);
}

TEST_F(Contacts, SeenKeyUpgradesWhenSignatureAppears)
{
    auto sig = store->stored_value("bob", Attribute::sig_x25519);
    store->add_adversary({AdversaryMode::strip_signature, "bob", Attribute::sig_x25519, {}});
    auto first = alice->load_signed_key("bob", KeyType::chat_x25519);
    EXPECT_EQ(first.method, AuthMethod::seen);
    EXPECT_EQ(alice->ring(KeyType::chat_x25519).lookup("bob")->method, AuthMethod::seen);

    store->clear_adversary();
    auto second = alice->load_signed_key("bob", KeyType::chat_x25519);
    EXPECT_EQ(second.method, AuthMethod::signature_verified);
    EXPECT_FALSE(second.freshly_tracked);
    auto rec = alice->ring(KeyType::chat_x25519).lookup("bob");
    EXPECT_EQ(rec->method, AuthMethod::signature_verified);
    EXPECT_EQ(rec->fingerprint, fingerprint_ec(bob_keys().chat.public_key()));
}

TEST_F(Contacts, UnsignedSeenKeyStaysSeen)
{
    store->add_adversary({AdversaryMode::strip_signature, "bob", Attribute::sig_rsa, {}});
    alice->load_signed_key("bob", KeyType::sharing_rsa);
    auto again = alice->load_signed_key("bob", KeyType::sharing_rsa);
    EXPECT_EQ(again.method, AuthMethod::seen);
    EXPECT_FALSE(again.freshly_tracked);
}

TEST_F(Contacts, SubstitutedSubKeyIsSignatureInvalid)
{
    alice->load_signed_key("bob", KeyType::chat_x25519);
    auto honest = alice->ring(KeyType::chat_x25519).lookup("bob");
    auto forged = generate_chat_keypair(system_entropy());
    store->add_adversary({AdversaryMode::substitute_key, "bob", Attribute::x25519_pub, to_bytes(forged.public_key())});
    EXPECT_EQ(code_of([&] { alice->load_signed_key("bob", KeyType::chat_x25519); }), ErrorCode::signature_invalid);
    EXPECT_EQ(alice->ring(KeyType::chat_x25519).lookup("bob"), honest);
}

TEST_F(Contacts, SubstitutedSubKeyBeforeContactIsSignatureInvalid)
{
    auto forged = generate_chat_keypair(system_entropy());
    store->add_adversary({AdversaryMode::substitute_key, "bob", Attribute::x25519_pub, to_bytes(forged.public_key())});
    EXPECT_EQ(code_of([&] { alice->load_signed_key("bob", KeyType::chat_x25519); }), ErrorCode::signature_invalid);
    EXPECT_TRUE(alice->ring(KeyType::chat_x25519).empty());
}

TEST_F(Contacts, SubstitutedKeyWithStrippedSignatureIsMismatch)
{
    alice->load_signed_key("bob", KeyType::chat_x25519);
    auto forged = generate_chat_keypair(system_entropy());
    store->add_adversary({AdversaryMode::substitute_key, "bob", Attribute::x25519_pub, to_bytes(forged.public_key())});
    store->add_adversary({AdversaryMode::strip_signature, "bob", Attribute::sig_x25519, {}});
    EXPECT_EQ(code_of([&] { alice->load_signed_key("bob", KeyType::chat_x25519); }), ErrorCode::fingerprint_mismatch);
}

TEST_F(Contacts, StrippedSignatureOnVerifiedKeyIsHarmless)
{
    alice->load_signed_key("bob", KeyType::sharing_rsa);
    store->add_adversary({AdversaryMode::strip_signature, "bob", Attribute::sig_rsa, {}});
    store->reset_stats();
    auto key = alice->load_signed_key("bob", KeyType::sharing_rsa);
    EXPECT_EQ(key.method, AuthMethod::signature_verified);
    EXPECT_EQ(fetches(), 1u);
}

TEST_F(Contacts, RotatedSubKeyRaisesKeyChangedWarning)
{
    alice->load_signed_key("bob", KeyType::chat_x25519);
    auto old_fp = alice->ring(KeyType::chat_x25519).lookup("bob")->fingerprint;

    auto rotated = generate_chat_keypair(system_entropy());
    auto sig = sign_public_key(bob_keys().identity, KeyType::chat_x25519, rotated.public_key());
    store->publish("bob", Attribute::x25519_pub, rotated.public_key());
    store->publish("bob", Attribute::sig_x25519, sig.sig);

    try
    {
        alice->load_signed_key("bob", KeyType::chat_x25519);
        FAIL();
    }
    catch (const KeyChangedWarning& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::key_changed_warning);
        EXPECT_EQ(e.tracked(), old_fp);
        EXPECT_EQ(e.observed(), fingerprint_ec(rotated.public_key()));
        EXPECT_TRUE(e.signature_verified());
    }
    EXPECT_EQ(alice->ring(KeyType::chat_x25519).lookup("bob")->fingerprint, old_fp);

    alice->reset_contact("bob", KeyType::chat_x25519);
    auto key = alice->load_signed_key("bob", KeyType::chat_x25519);
    EXPECT_EQ(key.method, AuthMethod::signature_verified);
    EXPECT_EQ(alice->ring(KeyType::chat_x25519).lookup("bob")->fingerprint, fingerprint_ec(rotated.public_key()));
}

TEST_F(Contacts, SignedLoadPropagatesIdentityMismatch)
{
    alice->load_identity_key("bob");
    auto forged = generate_identity_keypair(system_entropy());
    auto chat = generate_chat_keypair(system_entropy());
    store->add_adversary({AdversaryMode::substitute_key, "bob", Attribute::ed25519_pub, to_bytes(forged.public_key())});
    store->add_adversary({AdversaryMode::substitute_key, "bob", Attribute::x25519_pub, to_bytes(chat.public_key())});
    store->add_adversary({AdversaryMode::substitute_key, "bob", Attribute::sig_x25519,
        Bytes(sign_public_key(forged, KeyType::chat_x25519, chat.public_key()).sig.begin(),
            sign_public_key(forged, KeyType::chat_x25519, chat.public_key()).sig.end())});
    EXPECT_EQ(code_of([&] { alice->load_signed_key("bob", KeyType::chat_x25519); }), ErrorCode::fingerprint_mismatch);
    EXPECT_TRUE(alice->ring(KeyType::chat_x25519).empty());
}

TEST_F(Contacts, VerifyContactFingerprint)
{
    EXPECT_EQ(code_of([&] { alice->verify_contact_fingerprint("bob", std::string(40, '0')); }), ErrorCode::missing_record);

    alice->load_identity_key("bob");
    auto hex = fingerprint_ec(bob_keys().identity.public_key()).hex();

    auto wrong = hex;
    wrong[17] = wrong[17] == '0' ? '1' : '0';
    EXPECT_EQ(code_of([&] { alice->verify_contact_fingerprint("bob", wrong); }), ErrorCode::comparison_failed);
    EXPECT_EQ(alice->ring(KeyType::identity_ed25519).lookup("bob")->method, AuthMethod::seen);
    EXPECT_EQ(code_of([&] { alice->verify_contact_fingerprint("bob", "xyz"); }), ErrorCode::parameter);

    std::string upper;
    for (char c : fingerprint_grouped(Fingerprint::from_hex(hex)))
        upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    alice->verify_contact_fingerprint("bob", upper);
    EXPECT_EQ(alice->ring(KeyType::identity_ed25519).lookup("bob")->method, AuthMethod::fingerprint_comparison);

    // Reloading afterwards keeps the stronger method.
    EXPECT_EQ(alice->load_identity_key("bob").method, AuthMethod::fingerprint_comparison);
}

TEST_F(Contacts, MaximumTrackedAuthentication)
{
    for (auto t : all_key_types)
        alice->load_key("bob", t);
    EXPECT_EQ(alice->ring(KeyType::identity_ed25519).lookup("bob")->method, AuthMethod::seen);
    EXPECT_EQ(alice->ring(KeyType::chat_x25519).lookup("bob")->method, AuthMethod::signature_verified);
    EXPECT_EQ(alice->ring(KeyType::sharing_rsa).lookup("bob")->method, AuthMethod::signature_verified);
    alice->verify_contact_fingerprint("bob", fingerprint_ec(bob_keys().identity.public_key()).hex());
    EXPECT_EQ(alice->ring(KeyType::identity_ed25519).lookup("bob")->method, AuthMethod::fingerprint_comparison);
}

// -- detection matrix -----------------------------------------------------

namespace {

enum class Target
{
    identity,
    subkey
};

/// Returns the error code raised, or nullopt if the loads completed silently.
std::optional<ErrorCode> detection(Target target, bool before_contact)
{
    auto store = std::make_shared<AttributeStore>();
    auto bob = init_user(store, "bob", 7);
    Session alice(store, "alice");

    auto attack = [&] {
        if (target == Target::identity)
        {
            auto forged = generate_identity_keypair(system_entropy());
            store->add_adversary(
                {AdversaryMode::substitute_key, "bob", Attribute::ed25519_pub, to_bytes(forged.public_key())});
        }
        else
        {
            auto forged = generate_chat_keypair(system_entropy());
            store->add_adversary(
                {AdversaryMode::substitute_key, "bob", Attribute::x25519_pub, to_bytes(forged.public_key())});
        }
    };
    auto load = [&] {
        alice.load_identity_key("bob");
        alice.load_signed_key("bob", KeyType::chat_x25519);
    };

    try
    {
        if (before_contact)
            attack();
        else
        {
            load();
            attack();
        }
        load();
    }
    catch (const Error& e)
    {
        return e.code();
    }
    return std::nullopt;
}

} // namespace

TEST(DetectionMatrix, IdentityBeforeContactIsUndetectedByMachine)
{
    // The substituted bare identity key is pinned; only the honest signature
    // disagrees with it, so the sub-key load fails.
    EXPECT_EQ(detection(Target::identity, true), ErrorCode::signature_invalid);
}

TEST(DetectionMatrix, IdentityAfterContact)
{
    EXPECT_EQ(detection(Target::identity, false), ErrorCode::fingerprint_mismatch);
}

TEST(DetectionMatrix, SubKeyBeforeContact)
{
    EXPECT_EQ(detection(Target::subkey, true), ErrorCode::signature_invalid);
}

TEST(DetectionMatrix, SubKeyAfterContact)
{
    EXPECT_EQ(detection(Target::subkey, false), ErrorCode::signature_invalid);
}

TEST(DetectionMatrix, FullAttackerKeySetBeforeContactGoesUnnoticed)
{
    auto store = std::make_shared<AttributeStore>();
    auto bob = init_user(store, "bob", 8);
    auto attacker = generate_identity_keypair(system_entropy());
    auto chat = generate_chat_keypair(system_entropy());
    store->add_adversary({AdversaryMode::substitute_key, "bob", Attribute::ed25519_pub, to_bytes(attacker.public_key())});
    store->add_adversary({AdversaryMode::substitute_key, "bob", Attribute::x25519_pub, to_bytes(chat.public_key())});
    auto sig = sign_public_key(attacker, KeyType::chat_x25519, chat.public_key());
    store->add_adversary({AdversaryMode::substitute_key, "bob", Attribute::sig_x25519, Bytes(sig.sig.begin(), sig.sig.end())});

    Session alice(store, "alice");
    EXPECT_EQ(alice.load_identity_key("bob").method, AuthMethod::seen);
    EXPECT_EQ(alice.load_signed_key("bob", KeyType::chat_x25519).method, AuthMethod::signature_verified);

    // Only an out-of-band comparison with the real fingerprint reveals it.
    auto real = fingerprint_ec(bob.session.own_keys()->identity.public_key()).hex();
    EXPECT_EQ(code_of([&] { alice.verify_contact_fingerprint("bob", real); }), ErrorCode::comparison_failed);
}

TEST(DetectionMatrix, StripSignatureBeforeContactFallsBackToSeen)
{
    auto store = std::make_shared<AttributeStore>();
    auto bob = init_user(store, "bob", 9);
    store->add_adversary({AdversaryMode::strip_signature, "bob", Attribute::sig_x25519, {}});
    Session alice(store, "alice");
    EXPECT_EQ(alice.load_signed_key("bob", KeyType::chat_x25519).method, AuthMethod::seen);
}

// -- initialisation -------------------------------------------------------

TEST(Init, FreshUser)
{
    auto store = std::make_shared<AttributeStore>();
    auto result = init_user(store, "alice", 3);
    // The RSA pair came from the caller, so only the EC pairs are generated.
    RepairReport expected{
        {RepairKind::generate_key, KeyType::identity_ed25519},
        {RepairKind::generate_key, KeyType::chat_x25519},
        {RepairKind::publish_public, KeyType::identity_ed25519},
        {RepairKind::publish_public, KeyType::chat_x25519},
        {RepairKind::publish_public, KeyType::sharing_rsa},
        {RepairKind::publish_signature, KeyType::chat_x25519},
        {RepairKind::publish_signature, KeyType::sharing_rsa},
    };
    EXPECT_EQ(result.report, expected);
    EXPECT_EQ(store->stats().total_publishes, 5u);
    EXPECT_EQ(store->stats().total_fetches, 5u);

    auto& keys = *result.session.own_keys();
    EXPECT_EQ(store->stored_value("alice", Attribute::ed25519_pub), to_bytes(keys.identity.public_key()));
    EXPECT_EQ(store->stored_value("alice", Attribute::rsa_pub), keys.sharing.public_octets());
    auto sig = store->stored_value("alice", Attribute::sig_rsa);
    ASSERT_TRUE(sig);
    EXPECT_TRUE(verify_key_signature(keys.identity.public_key(), KeyType::sharing_rsa, keys.sharing.public_octets(), *sig));
}

TEST(Init, FreshUserGeneratesAllThreePairs)
{
    auto store = std::make_shared<AttributeStore>();
    InitRequest req;
    req.store = store;
    req.own_handle = "alice";
    auto result = init_own_keys(std::move(req));
    ASSERT_EQ(result.report.size(), 8u);
    EXPECT_EQ(result.report[2], (RepairAction{RepairKind::generate_key, KeyType::sharing_rsa}));
    EXPECT_TRUE(check_keypair_consistency(result.session.own_keys()->sharing));
    EXPECT_EQ(store->stats().total_publishes, 5u);
}

TEST(Init, SecondRunIsIdempotent)
{
    auto store = std::make_shared<AttributeStore>();
    auto first = init_user(store, "alice", 4);
    auto before = snapshot(*store, "alice");
    store->reset_stats();

    DeterministicEntropy rng(99);
    auto second = init_own_keys(reinit_request(first, rng));
    EXPECT_TRUE(second.report.empty());
    EXPECT_EQ(store->stats().total_publishes, 0u);
    EXPECT_EQ(snapshot(*store, "alice"), before);
    EXPECT_EQ(second.session.own_keys()->identity, first.session.own_keys()->identity);
}

TEST(Init, LegacyClientMissingRsaSignature)
{
    auto store = std::make_shared<AttributeStore>();
    auto first = init_user(store, "alice", 5);

    // Rebuild the store without sig_rsa.
    auto legacy = std::make_shared<AttributeStore>();
    for (auto a : all_attributes)
        if (a != Attribute::sig_rsa)
            legacy->publish("alice", a, *store->stored_value("alice", a));
    legacy->reset_stats();

    DeterministicEntropy rng(5);
    auto req = reinit_request(first, rng);
    req.store = legacy;
    auto result = init_own_keys(std::move(req));
    EXPECT_EQ(result.report, (RepairReport{{RepairKind::publish_signature, KeyType::sharing_rsa}}));
    EXPECT_EQ(legacy->stats().total_publishes, 1u);
}

TEST(Init, EachCorruptedAttributeIsRepairedAlone)
{
    auto store = std::make_shared<AttributeStore>();
    auto first = init_user(store, "alice", 6);
    auto honest = snapshot(*store, "alice");

    const std::map<Attribute, RepairAction> expected{
        {Attribute::ed25519_pub, {RepairKind::publish_public, KeyType::identity_ed25519}},
        {Attribute::x25519_pub, {RepairKind::publish_public, KeyType::chat_x25519}},
        {Attribute::rsa_pub, {RepairKind::publish_public, KeyType::sharing_rsa}},
        {Attribute::sig_x25519, {RepairKind::publish_signature, KeyType::chat_x25519}},
        {Attribute::sig_rsa, {RepairKind::publish_signature, KeyType::sharing_rsa}},
    };

    for (auto a : all_attributes)
    {
        auto corrupt = *store->stored_value("alice", a);
        if (a == Attribute::rsa_pub)
            corrupt = rsa_pair(1).public_octets();
        else
            corrupt[corrupt.size() / 2] ^= 0x01;
        store->publish("alice", a, corrupt);
        store->reset_stats();

        DeterministicEntropy rng(60);
        auto result = init_own_keys(reinit_request(first, rng));
        EXPECT_EQ(result.report, RepairReport{expected.at(a)}) << to_string(a);
        EXPECT_EQ(store->stats().total_publishes, 1u) << to_string(a);
        // Ed25519 signing is deterministic, so even a re-signed attribute returns to its original octets.
        EXPECT_EQ(snapshot(*store, "alice"), honest) << to_string(a);
    }
}

TEST(Init, InconsistentChatPublicIsRederived)
{
    auto store = std::make_shared<AttributeStore>();
    auto first = init_user(store, "alice", 10);
    auto keys = *first.session.own_keys();

    DeterministicEntropy rng(10);
    auto req = reinit_request(first, rng);
    auto bad_public = to_bytes(keys.chat.public_key());
    bad_public[0] ^= 0x80;
    req.chat.pair = ChatKeyPair(keys.chat.scalar(), bad_public);
    auto result = init_own_keys(std::move(req));
    EXPECT_EQ(result.report, (RepairReport{{RepairKind::rederive_public, KeyType::chat_x25519}}));
    EXPECT_EQ(result.session.own_keys()->chat, keys.chat);
}

TEST(Init, InconsistentIdentityPublicIsRederived)
{
    auto store = std::make_shared<AttributeStore>();
    auto first = init_user(store, "alice", 11);
    auto keys = *first.session.own_keys();

    DeterministicEntropy rng(11);
    auto req = reinit_request(first, rng);
    req.identity.pair = IdentityKeyPair(keys.identity.seed(), Bytes(32, 0x01));
    auto result = init_own_keys(std::move(req));
    EXPECT_EQ(result.report, (RepairReport{{RepairKind::rederive_public, KeyType::identity_ed25519}}));
    EXPECT_EQ(result.session.own_keys()->identity, keys.identity);
}

TEST(Init, InconsistentRsaPairIsRegenerated)
{
    auto store = std::make_shared<AttributeStore>();
    auto first = init_user(store, "alice", 12);
    auto& good = rsa_pair(0);

    DeterministicEntropy rng(12);
    auto req = reinit_request(first, rng);
    req.sharing.pair = SharingKeyPair(good.modulus(), good.exponent(), good.private_exponent(), rsa_pair(1).prime_p(),
        good.prime_q());
    auto result = init_own_keys(std::move(req));
    RepairReport expected{
        {RepairKind::regenerate_key, KeyType::sharing_rsa},
        {RepairKind::publish_public, KeyType::sharing_rsa},
        {RepairKind::publish_signature, KeyType::sharing_rsa},
    };
    EXPECT_EQ(result.report, expected);
    EXPECT_NE(result.session.own_keys()->sharing, good);
}

TEST(Init, UnreadableChatKeyIsRegenerated)
{
    auto store = std::make_shared<AttributeStore>();
    auto first = init_user(store, "alice", 13);
    DeterministicEntropy rng(13);
    auto req = reinit_request(first, rng);
    req.chat.pair.reset();
    req.chat.unreadable = true;
    auto result = init_own_keys(std::move(req));
    RepairReport expected{
        {RepairKind::regenerate_key, KeyType::chat_x25519},
        {RepairKind::publish_public, KeyType::chat_x25519},
        {RepairKind::publish_signature, KeyType::chat_x25519},
    };
    EXPECT_EQ(result.report, expected);
}

TEST(Init, IdentityIsNeverReplacedSilently)
{
    auto store = std::make_shared<AttributeStore>();
    auto first = init_user(store, "alice", 14);
    auto before = snapshot(*store, "alice");

    DeterministicEntropy rng(14);
    auto missing = reinit_request(first, rng);
    missing.identity.pair.reset();
    EXPECT_EQ(code_of([&] { init_own_keys(missing); }), ErrorCode::init);

    auto unreadable = reinit_request(first, rng);
    unreadable.identity.pair.reset();
    unreadable.identity.unreadable = true;
    EXPECT_EQ(code_of([&] { init_own_keys(unreadable); }), ErrorCode::init);
    EXPECT_EQ(snapshot(*store, "alice"), before);
}

TEST(Init, ForceIdentityRegeneratesAndResigns)
{
    auto store = std::make_shared<AttributeStore>();
    auto first = init_user(store, "alice", 15);
    DeterministicEntropy rng(115);
    auto req = reinit_request(first, rng);
    req.identity.pair.reset();
    req.force_identity = true;
    auto result = init_own_keys(std::move(req));
    RepairReport expected{
        {RepairKind::regenerate_key, KeyType::identity_ed25519},
        {RepairKind::publish_public, KeyType::identity_ed25519},
        {RepairKind::publish_signature, KeyType::chat_x25519},
        {RepairKind::publish_signature, KeyType::sharing_rsa},
    };
    EXPECT_EQ(result.report, expected);
    EXPECT_NE(result.session.own_keys()->identity, first.session.own_keys()->identity);
}

TEST(Init, StoreUnavailable)
{
    auto store = std::make_shared<AttributeStore>();
    store->set_available(false);
    EXPECT_EQ(code_of([&] { init_user(store, "alice", 16); }), ErrorCode::store_unavailable);
}

TEST(Init, FailingEntropyIsAGenerationError)
{
    auto store = std::make_shared<AttributeStore>();
    test::FailingEntropy rng;
    InitRequest req;
    req.store = store;
    req.own_handle = "alice";
    req.rng = &rng;
    EXPECT_EQ(code_of([&] { init_own_keys(req); }), ErrorCode::generation);
    EXPECT_EQ(store->stats().total_publishes, 0u);
}
