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

#include <keyauth/simulation.hpp>
#include <keyauth/workflow.hpp>

#include <random>

namespace keyauth {

std::string_view to_string(Scenario s)
{
    switch (s)
    {
        case Scenario::mitm_identity_pre: return "mitm-identity-pre";
        case Scenario::mitm_identity_post: return "mitm-identity-post";
        case Scenario::mitm_subkey_pre: return "mitm-subkey-pre";
        case Scenario::mitm_subkey_post: return "mitm-subkey-post";
        case Scenario::strip_signature: return "strip-signature";
    }
    return "unknown";
}

std::optional<Scenario> scenario_from_string(std::string_view name)
{
    for (auto s : all_scenarios)
        if (to_string(s) == name)
            return s;
    return std::nullopt;
}

SharingKeyPool::SharingKeyPool(std::size_t size)
    : size_(size == 0 ? 1 : size)
{
}

const SharingKeyPair& SharingKeyPool::next(EntropySource& rng)
{
    if (keys_.size() < size_)
    {
        keys_.push_back(generate_sharing_keypair(rng));
        return keys_.back();
    }
    return keys_[cursor_++ % size_];
}

namespace {

class Run
{
  public:
    Run(Scenario scenario, std::uint64_t seed, SharingKeyPool& pool)
        : rng_(seed)
        , choice_(seed)
        , store_(std::make_shared<AttributeStore>())
    {
        result_.scenario = scenario;
        alice_ = "alice-" + random_suffix();
        bob_ = "bob-" + random_suffix();
        sub_type_ = coin() ? KeyType::chat_x25519 : KeyType::sharing_rsa;

        auto init = [&](const std::string& handle, const SharingKeyPair& rsa) {
            InitRequest req;
            req.store = store_;
            req.own_handle = handle;
            req.sharing.pair = rsa;
            req.rng = &rng_;
            return init_own_keys(std::move(req));
        };
        auto bob = init(bob_, pool.next(rng_));
        bob_keys_ = *bob.session.own_keys();
        alice_session_.emplace(std::move(init(alice_, pool.next(rng_)).session));

        attacker_identity_ = generate_identity_keypair(rng_);
        attacker_chat_ = generate_chat_keypair(rng_);
        attacker_sharing_ = pool.next(rng_);

        log("users " + alice_ + " and " + bob_ + " initialised; sub-key under test: " + std::string(to_string(sub_type_)));
    }

    ScenarioResult finish(std::string expected, std::string observed, bool extra_checks = true)
    {
        result_.expected = std::move(expected);
        result_.observed = std::move(observed);
        result_.passed = extra_checks and result_.expected == result_.observed;
        log("expected: " + result_.expected);
        log("observed: " + result_.observed);
        log(result_.passed ? "result: as expected" : "result: UNEXPECTED");
        return std::move(result_);
    }

    void log(std::string line) { result_.transcript.push_back(std::move(line)); }

    bool coin() { return choice_() & 1; }
    int pick(int n) { return static_cast<int>(choice_() % static_cast<std::uint64_t>(n)); }

    std::string random_suffix()
    {
        std::array<std::uint8_t, 4> b{};
        rng_.fill(b);
        return to_hex(b);
    }

    Session& alice() { return *alice_session_; }

    Bytes bob_public(KeyType t) const
    {
        switch (t)
        {
            case KeyType::identity_ed25519: return {bob_keys_->identity.public_key().begin(), bob_keys_->identity.public_key().end()};
            case KeyType::chat_x25519: return {bob_keys_->chat.public_key().begin(), bob_keys_->chat.public_key().end()};
            case KeyType::sharing_rsa: return bob_keys_->sharing.public_octets();
        }
        return {};
    }

    Bytes attacker_public(KeyType t) const
    {
        switch (t)
        {
            case KeyType::identity_ed25519: return {attacker_identity_->public_key().begin(), attacker_identity_->public_key().end()};
            case KeyType::chat_x25519: return {attacker_chat_->public_key().begin(), attacker_chat_->public_key().end()};
            case KeyType::sharing_rsa: return attacker_sharing_->public_octets();
        }
        return {};
    }

    Bytes attacker_signature(KeyType t) const
    {
        auto sig = sign_public_key(*attacker_identity_, t, attacker_public(t));
        return {sig.sig.begin(), sig.sig.end()};
    }

    void substitute(Attribute a, Bytes replacement)
    {
        store_->add_adversary({AdversaryMode::substitute_key, bob_, a, std::move(replacement)});
        log("adversary substitutes " + std::string(to_string(a)) + " of " + bob_);
    }

    void strip(Attribute a)
    {
        store_->add_adversary({AdversaryMode::strip_signature, bob_, a, {}});
        log("adversary strips " + std::string(to_string(a)) + " of " + bob_);
    }

    /// Runs a load and names its outcome: "ok:<method>" or the error class.
    std::string attempt(KeyType t)
    {
        try
        {
            auto key = alice().load_key(bob_, t);
            std::string out = "ok:" + std::string(to_string(key.method));
            log("alice loads " + std::string(to_string(t)) + " key of bob: " + std::string(to_string(key.method)));
            return out;
        }
        catch (const Error& e)
        {
            log("alice loads " + std::string(to_string(t)) + " key of bob: ALARM " + std::string(to_string(e.code())) + ": " + e.what());
            return std::string(to_string(e.code()));
        }
    }

    bool pinned_to(KeyType t, const Bytes& public_octets) const
    {
        auto rec = alice_session_->ring(t).lookup(bob_);
        return rec and rec->fingerprint == fingerprint_public(t, public_octets);
    }

    const std::string& bob_handle() const { return bob_; }
    KeyType sub_type() const { return sub_type_; }
    AttributeStore& store() { return *store_; }

  private:
    DeterministicEntropy rng_;
    std::mt19937_64 choice_;
    std::shared_ptr<AttributeStore> store_;
    ScenarioResult result_;
    std::string alice_, bob_;
    KeyType sub_type_;
    std::optional<OwnKeys> bob_keys_;
    std::optional<Session> alice_session_;
    std::optional<IdentityKeyPair> attacker_identity_;
    std::optional<ChatKeyPair> attacker_chat_;
    std::optional<SharingKeyPair> attacker_sharing_;
};

bool is_ok(const std::string& outcome)
{
    return outcome.rfind("ok:", 0) == 0;
}

ScenarioResult identity_pre(Run& run)
{
    auto t = run.sub_type();
    run.substitute(Attribute::ed25519_pub, run.attacker_public(KeyType::identity_ed25519));
    run.substitute(public_attribute(t), run.attacker_public(t));
    run.substitute(signature_attribute(t), run.attacker_signature(t));

    bool identity_first = run.coin();
    std::string first = identity_first ? run.attempt(KeyType::identity_ed25519) : "ok:";
    std::string sub = run.attempt(t);

    bool loads_ok = is_ok(first) and sub == "ok:signature-verified";
    bool pinned_attacker = run.pinned_to(KeyType::identity_ed25519, run.attacker_public(KeyType::identity_ed25519));

    // The only defence left: comparing fingerprints out of band.
    auto honest = fingerprint_ec(run.bob_public(KeyType::identity_ed25519));
    std::string oob;
    try
    {
        run.alice().verify_contact_fingerprint(run.bob_handle(), fingerprint_grouped(honest));
        oob = "accepted";
    }
    catch (const Error& e)
    {
        oob = std::string(to_string(e.code()));
    }
    run.log("out-of-band comparison with the honest fingerprint: " + oob);
    run.log("machine checks cannot detect a substitution that precedes first contact");

    return run.finish("undetected", loads_ok and pinned_attacker ? "undetected" : "detected:" + sub,
        oob == "comparison-failed");
}

ScenarioResult identity_post(Run& run)
{
    auto t = run.sub_type();
    std::string pre = run.attempt(KeyType::identity_ed25519);
    bool sub_preloaded = run.coin();
    if (sub_preloaded)
        pre += run.attempt(t);

    bool full_set = run.coin();
    run.substitute(Attribute::ed25519_pub, run.attacker_public(KeyType::identity_ed25519));
    std::string observed;
    if (full_set)
    {
        run.substitute(public_attribute(t), run.attacker_public(t));
        run.substitute(signature_attribute(t), run.attacker_signature(t));
        observed = run.attempt(t);
    }
    else
        observed = run.attempt(KeyType::identity_ed25519);

    bool honest_pin = run.pinned_to(KeyType::identity_ed25519, run.bob_public(KeyType::identity_ed25519));
    return run.finish("fingerprint-mismatch", observed, honest_pin and pre.find("ok:") == 0);
}

ScenarioResult subkey_pre(Run& run)
{
    auto t = run.sub_type();
    if (run.coin())
        run.attempt(KeyType::identity_ed25519);

    run.substitute(public_attribute(t), run.attacker_public(t));
    switch (run.pick(3))
    {
        case 0:
            run.log("honest signature left in place");
            break;
        case 1:
            run.substitute(signature_attribute(t), run.attacker_signature(t));
            break;
        default:
        {
            Bytes junk(64);
            for (auto& b : junk)
                b = static_cast<std::uint8_t>(run.pick(256));
            run.substitute(signature_attribute(t), junk);
        }
    }

    auto observed = run.attempt(t);
    bool untracked = not run.alice().ring(t).lookup(run.bob_handle());
    return run.finish("signature-invalid", observed, untracked);
}

ScenarioResult subkey_post(Run& run)
{
    auto t = run.sub_type();
    auto pre = run.attempt(t);

    run.substitute(public_attribute(t), run.attacker_public(t));
    std::string expected = "signature-invalid";
    switch (run.pick(3))
    {
        case 0:
            run.log("honest signature left in place");
            break;
        case 1:
            run.substitute(signature_attribute(t), run.attacker_signature(t));
            break;
        default:
            run.strip(signature_attribute(t));
            expected = "fingerprint-mismatch";
    }

    auto observed = run.attempt(t);
    bool honest_pin = run.pinned_to(t, run.bob_public(t));
    return run.finish(expected, observed, pre == "ok:signature-verified" and honest_pin);
}

ScenarioResult strip_signature(Run& run)
{
    auto t = run.sub_type();
    auto pre = run.attempt(t);

    run.strip(signature_attribute(t));
    run.store().reset_stats();
    auto observed = run.attempt(t);
    auto fetches = run.store().stats().total_fetches;
    run.log("store fetches for the reload: " + std::to_string(fetches));

    std::string outcome = observed == "ok:signature-verified" and fetches == 1 ? "verified-with-1-fetch" : observed;
    return run.finish("verified-with-1-fetch", outcome, pre == "ok:signature-verified");
}

} // namespace

ScenarioResult run_scenario(Scenario scenario, std::uint64_t seed, SharingKeyPool& pool)
{
    Run run(scenario, seed, pool);
    switch (scenario)
    {
        case Scenario::mitm_identity_pre: return identity_pre(run);
        case Scenario::mitm_identity_post: return identity_post(run);
        case Scenario::mitm_subkey_pre: return subkey_pre(run);
        case Scenario::mitm_subkey_post: return subkey_post(run);
        case Scenario::strip_signature: return strip_signature(run);
    }
    throw Error(ErrorCode::parameter, "unknown scenario");
}

} // namespace keyauth
