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

#include "cli.hpp"

#include <keyauth/attribute_store.hpp>
#include <keyauth/authring.hpp>
#include <keyauth/simulation.hpp>
#include <keyauth/workflow.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>

namespace keyauth::cli {

namespace fs = std::filesystem;

int exit_code(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::fingerprint_mismatch: return exit_fingerprint_mismatch;
        case ErrorCode::signature_invalid: return exit_signature_invalid;
        case ErrorCode::key_changed_warning: return exit_key_changed;
        case ErrorCode::missing_key: return exit_missing_key;
        case ErrorCode::missing_record: return exit_missing_record;
        case ErrorCode::comparison_failed: return exit_comparison_failed;
        case ErrorCode::store_unavailable: return exit_store_unavailable;
        case ErrorCode::init: return exit_init;
        case ErrorCode::parse: return exit_corrupt_ring;
        case ErrorCode::malformed_key: return exit_malformed_key;
        case ErrorCode::parameter: return exit_parameter;
        case ErrorCode::publish: return exit_publish;
        case ErrorCode::generation: return exit_generation;
        case ErrorCode::fingerprint_conflict: return exit_fingerprint_conflict;
        case ErrorCode::illegal_method: return exit_illegal_method;
    }
    return exit_internal;
}

namespace {

struct Config
{
    fs::path store_path;
    fs::path home;
    std::string user;
    bool machine = false;
    bool force_identity = false;
};

char sep_of(const Config& cfg)
{
    return cfg.machine ? '\t' : ' ';
}

// -- files in the home directory --------------------------------------

fs::path key_file(const Config& cfg, KeyType t)
{
    return cfg.home / (std::string(to_string(t)) + ".sk");
}

fs::path ring_file(const Config& cfg, KeyType t)
{
    return cfg.home / (std::string(to_string(t)) + ".ring");
}

std::optional<std::vector<std::string>> read_lines(const fs::path& path)
{
    std::ifstream in(path);
    if (not in)
        return std::nullopt;
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (not line.empty())
            lines.push_back(line);
    return lines;
}

void write_file(const fs::path& path, std::string_view contents, bool secret)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (not out)
            throw Error(ErrorCode::init, "cannot write " + tmp.string());
        if (secret)
            fs::permissions(tmp, fs::perms::owner_read | fs::perms::owner_write);
        out << contents;
        if (not out.flush())
            throw Error(ErrorCode::init, "cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

template <class Pair>
LocalKey<Pair> read_key(const Config& cfg, KeyType t)
{
    LocalKey<Pair> key;
    auto path = key_file(cfg, t);
    std::error_code ec;
    if (not fs::exists(path, ec))
        return key;

    auto lines = read_lines(path);
    std::vector<Bytes> fields;
    if (lines)
    {
        for (auto& line : *lines)
        {
            auto v = from_base64(line);
            if (not v)
                break;
            fields.push_back(std::move(*v));
        }
    }
    try
    {
        if constexpr (std::is_same_v<Pair, IdentityKeyPair>)
        {
            if (lines and fields.size() == 1 and lines->size() == 1)
                key.pair = IdentityKeyPair::from_seed(fields[0]);
        }
        else if constexpr (std::is_same_v<Pair, ChatKeyPair>)
        {
            if (lines and fields.size() == 1 and lines->size() == 1)
                key.pair = ChatKeyPair(fields[0], derive_x25519_public(fields[0]));
        }
        else
        {
            if (lines and fields.size() == 5 and lines->size() == 5)
                key.pair = SharingKeyPair(fields[0], fields[1], fields[2], fields[3], fields[4]);
        }
    }
    catch (const Error&)
    {
        key.pair.reset();
    }
    key.unreadable = not key.pair;
    return key;
}

std::string encode_key(const IdentityKeyPair& k)
{
    return to_base64(k.seed()) + "\n";
}

std::string encode_key(const ChatKeyPair& k)
{
    return to_base64(k.scalar()) + "\n";
}

std::string encode_key(const SharingKeyPair& k)
{
    std::string out;
    for (auto* v : {&k.modulus(), &k.exponent(), &k.private_exponent(), &k.prime_p(), &k.prime_q()})
        out += to_base64(*v) + "\n";
    return out;
}

RingSet read_rings(const Config& cfg)
{
    RingSet rings;
    for (auto t : all_key_types)
    {
        auto path = ring_file(cfg, t);
        std::error_code ec;
        if (not fs::exists(path, ec))
            continue;
        std::ifstream in(path, std::ios::binary);
        Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (not in and not in.eof())
            throw Error(ErrorCode::parse, "cannot read " + path.string());
        try
        {
            auto ring = AuthRing::deserialise(data);
            if (ring.key_type() != t)
                throw ParseError(ParseFailure::bad_key_type, "ring holds " + std::string(to_string(ring.key_type())) + " keys");
            rings[t] = std::move(ring);
        }
        catch (const ParseError& e)
        {
            throw ParseError(e.failure(), path.string() + ": " + std::string(to_string(e.failure())) + ": " + e.what());
        }
    }
    return rings;
}

void write_rings(const Config& cfg, const RingSet& rings)
{
    for (auto t : all_key_types)
    {
        auto data = rings[t].serialise();
        write_file(ring_file(cfg, t), std::string_view(reinterpret_cast<const char*>(data.data()), data.size()), true);
    }
}

std::optional<OwnKeys> read_own_keys(const Config& cfg)
{
    auto identity = read_key<IdentityKeyPair>(cfg, KeyType::identity_ed25519);
    auto chat = read_key<ChatKeyPair>(cfg, KeyType::chat_x25519);
    auto sharing = read_key<SharingKeyPair>(cfg, KeyType::sharing_rsa);
    if (not identity.pair or not chat.pair or not sharing.pair)
        return std::nullopt;
    return OwnKeys{*identity.pair, *chat.pair, *sharing.pair};
}

// -- validation ---------------------------------------------------------

void require_user_config(const Config& cfg)
{
    if (cfg.store_path.empty() or cfg.home.empty() or cfg.user.empty())
        throw CLI::ValidationError("--store, --home and --user are required for this command");
    if (not is_valid_handle(cfg.user))
        throw CLI::ValidationError("--user is not a valid handle");
    auto parent = fs::absolute(cfg.store_path).parent_path();
    std::error_code ec;
    if (not fs::is_directory(parent, ec))
        throw CLI::ValidationError("directory for --store does not exist: " + parent.string());
    if (fs::exists(cfg.home, ec) and not fs::is_directory(cfg.home, ec))
        throw CLI::ValidationError("--home is not a directory: " + cfg.home.string());
}

void require_writable_home(const Config& cfg)
{
    std::error_code ec;
    fs::create_directories(cfg.home, ec);
    if (not fs::is_directory(cfg.home))
        throw Error(ErrorCode::init, "cannot create " + cfg.home.string() + (ec ? ": " + ec.message() : ""));
    auto probe = cfg.home / ".write-probe";
    {
        std::ofstream out(probe);
        if (not out or not (out << "probe").flush())
            throw Error(ErrorCode::init, cfg.home.string() + " is not writable");
    }
    fs::remove(probe, ec);
}

Session open_session(const Config& cfg)
{
    auto store = std::make_shared<AttributeStore>(cfg.store_path);
    return Session(store, cfg.user, read_rings(cfg), read_own_keys(cfg));
}

// -- commands -------------------------------------------------------------

int cmd_init(const Config& cfg, std::ostream& out)
{
    require_writable_home(cfg);

    InitRequest req;
    req.store = std::make_shared<AttributeStore>(cfg.store_path);
    req.own_handle = cfg.user;
    req.identity = read_key<IdentityKeyPair>(cfg, KeyType::identity_ed25519);
    req.chat = read_key<ChatKeyPair>(cfg, KeyType::chat_x25519);
    req.sharing = read_key<SharingKeyPair>(cfg, KeyType::sharing_rsa);
    req.rings = read_rings(cfg);
    req.force_identity = cfg.force_identity;

    auto original = std::make_tuple(req.identity.pair, req.chat.pair, req.sharing.pair);
    auto result = init_own_keys(std::move(req));
    auto& keys = *result.session.own_keys();

    if (std::get<0>(original) != keys.identity)
        write_file(key_file(cfg, KeyType::identity_ed25519), encode_key(keys.identity), true);
    if (std::get<1>(original) != keys.chat)
        write_file(key_file(cfg, KeyType::chat_x25519), encode_key(keys.chat), true);
    if (std::get<2>(original) != keys.sharing)
        write_file(key_file(cfg, KeyType::sharing_rsa), encode_key(keys.sharing), true);
    for (auto t : all_key_types)
        if (not fs::exists(ring_file(cfg, t)))
        {
            write_rings(cfg, result.session.rings());
            break;
        }

    if (not cfg.machine)
    {
        if (result.report.empty())
            out << "keys for " << cfg.user << " are consistent; nothing to do\n";
        else
            out << "initialised keys for " << cfg.user << " (" << result.report.size() << " actions)\n";
    }
    for (auto& action : result.report)
        out << (cfg.machine ? "" : "  ") << to_string(action) << '\n';
    return exit_ok;
}

void print_fingerprint(const Config& cfg, std::ostream& out, std::string_view handle, const Fingerprint& fp)
{
    if (cfg.machine)
        out << fp.hex() << '\n';
    else
        out << "identity credentials of " << handle << ":\n  " << fingerprint_grouped(fp) << '\n';
}

int cmd_credentials(const Config& cfg, const std::string& handle, std::ostream& out)
{
    if (handle.empty() or handle == cfg.user)
    {
        auto identity = read_key<IdentityKeyPair>(cfg, KeyType::identity_ed25519);
        if (not identity.pair)
            throw Error(identity.unreadable ? ErrorCode::init : ErrorCode::missing_key,
                identity.unreadable ? "own identity key is unreadable" : "no own identity key; run init first");
        print_fingerprint(cfg, out, cfg.user, fingerprint_ec(identity.pair->public_key()));
        return exit_ok;
    }

    auto session = open_session(cfg);
    auto key = session.load_identity_key(handle);
    write_rings(cfg, session.rings());
    print_fingerprint(cfg, out, handle, fingerprint_ec(key.public_octets));
    if (not cfg.machine and key.freshly_tracked)
        out << "  (first contact: key is now tracked as seen)\n";
    return exit_ok;
}

int cmd_verify(const Config& cfg, const std::string& handle, const std::string& asserted, std::ostream& out,
    std::ostream& err)
{
    auto session = open_session(cfg);
    try
    {
        session.verify_contact_fingerprint(handle, asserted);
    }
    catch (const Error& e)
    {
        if (e.code() == ErrorCode::comparison_failed)
            err << "DO NOT TRUST: the fingerprint given for " << handle << " does not match its identity key\n";
        throw;
    }
    write_rings(cfg, session.rings());
    if (cfg.machine)
        out << "verified\n";
    else
        out << "identity key of " << handle << " verified by fingerprint comparison\n";
    return exit_ok;
}

int cmd_fetch(const Config& cfg, const std::string& handle, KeyType type, std::ostream& out)
{
    auto session = open_session(cfg);
    auto before = session.store().stats().total_fetches;
    std::optional<LoadedKey> key;
    try
    {
        key = session.load_key(handle, type);
    }
    catch (...)
    {
        write_rings(cfg, session.rings());
        throw;
    }
    write_rings(cfg, session.rings());
    auto delta = session.store().stats().total_fetches - before;

    if (cfg.machine)
        out << "key_type=" << to_string(type) << "\nkey=" << to_base64(key->public_octets)
            << "\nmethod=" << to_string(key->method) << "\nfetches=" << delta << '\n';
    else
        out << to_string(type) << " key of " << handle << ": " << to_base64(key->public_octets) << '\n'
            << "authentication: " << to_string(key->method) << (key->freshly_tracked ? " (newly tracked)" : "") << '\n'
            << "store fetches: " << delta << '\n';
    return exit_ok;
}

int cmd_ring(const Config& cfg, const std::string& type_name, bool all, std::ostream& out)
{
    auto rings = read_rings(cfg);
    std::vector<KeyType> types;
    if (all)
        types.assign(all_key_types.begin(), all_key_types.end());
    else if (auto t = key_type_from_string(type_name))
        types.push_back(*t);
    else
        throw CLI::ValidationError("key type must be ed25519, x25519 or rsa, or use --all");

    const char sep = sep_of(cfg);
    for (auto t : types)
        for (auto& [handle, rec] : rings[t].records())
        {
            if (all)
                out << to_string(t) << sep;
            out << handle << sep << rec.fingerprint.hex() << sep << int(rec.trust) << sep << to_string(rec.method) << '\n';
        }
    return exit_ok;
}

int cmd_simulate(const Config& cfg, const std::string& name, unsigned repeat, std::uint64_t seed, std::ostream& out)
{
    auto scenario = scenario_from_string(name);
    if (not scenario)
        throw CLI::ValidationError("unknown scenario " + name);

    SharingKeyPool pool;
    unsigned failures = 0;
    for (unsigned i = 0; i < repeat; ++i)
    {
        auto result = run_scenario(*scenario, seed + i, pool);
        if (not result.passed)
            ++failures;
        if (repeat == 1 and not cfg.machine)
            for (auto& line : result.transcript)
                out << line << '\n';
        else
            out << to_string(*scenario) << sep_of(cfg) << "run=" << i << sep_of(cfg) << "expected=" << result.expected
                << sep_of(cfg) << "observed=" << result.observed << sep_of(cfg) << (result.passed ? "ok" : "FAIL") << '\n';
    }
    if (repeat > 1 and not cfg.machine)
        out << to_string(*scenario) << ": " << (repeat - failures) << "/" << repeat << " runs as expected\n";
    return failures == 0 ? exit_ok : exit_simulation_failed;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Key authentication tracking for end-to-end encrypted contacts", "keyauth"};
    app.require_subcommand(1);
    app.fallthrough();

    Config cfg;
    app.add_option("--store", cfg.store_path, "attribute store file (JSON)");
    app.add_option("--home", cfg.home, "directory holding private keys and authentication rings");
    app.add_option("--user", cfg.user, "own user handle");
    app.add_flag("--machine", cfg.machine, "line-oriented machine-readable output");
    app.add_flag("--force-identity", cfg.force_identity, "allow init to replace the identity key pair");

    auto init = app.add_subcommand("init", "load, check, repair and publish own keys");

    std::string cred_handle;
    auto credentials = app.add_subcommand("credentials", "show identity fingerprint (own or a contact's)");
    credentials->add_option("handle", cred_handle, "contact handle; omit for own credentials");

    std::string verify_handle, verify_fp;
    auto verify = app.add_subcommand("verify", "confirm a contact's fingerprint compared out of band");
    verify->add_option("handle", verify_handle)->required();
    verify->add_option("fingerprint", verify_fp, "40 hex characters, spaces allowed")->required();

    std::string fetch_handle, fetch_type;
    auto fetch = app.add_subcommand("fetch", "load a contact's public key with authentication tracking");
    fetch->add_option("handle", fetch_handle)->required();
    fetch->add_option("key-type", fetch_type, "ed25519, x25519 or rsa")->required();

    std::string ring_type;
    bool ring_all = false;
    auto ring = app.add_subcommand("ring", "list tracked fingerprints");
    ring->add_option("key-type", ring_type, "ed25519, x25519 or rsa");
    ring->add_flag("--all", ring_all, "list every ring");

    std::string scenario;
    unsigned repeat = 1;
    std::uint64_t seed = 1;
    auto simulate = app.add_subcommand("simulate", "run an adversary scenario against an in-memory store");
    simulate->add_option("scenario", scenario,
                "mitm-identity-pre, mitm-identity-post, mitm-subkey-pre, mitm-subkey-post or strip-signature")
        ->required();
    simulate->add_option("--repeat", repeat, "number of randomised runs")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", seed, "seed of the first run");

    try
    {
        app.parse(argc, argv);

        if (simulate->parsed())
            return cmd_simulate(cfg, scenario, repeat, seed, out);

        require_user_config(cfg);
        if (init->parsed())
            return cmd_init(cfg, out);
        if (credentials->parsed())
            return cmd_credentials(cfg, cred_handle, out);
        if (verify->parsed())
            return cmd_verify(cfg, verify_handle, verify_fp, out, err);
        if (ring->parsed())
            return cmd_ring(cfg, ring_type, ring_all, out);

        auto type = key_type_from_string(fetch_type);
        if (not type)
            throw CLI::ValidationError("key type must be ed25519, x25519 or rsa");
        return cmd_fetch(cfg, fetch_handle, *type, out);
    }
    catch (const CLI::CallForHelp& e)
    {
        app.exit(e, out, err);
        return exit_ok;
    }
    catch (const CLI::CallForAllHelp& e)
    {
        app.exit(e, out, err);
        return exit_ok;
    }
    catch (const CLI::Error& e)
    {
        err << "keyauth: " << e.what() << '\n';
        return exit_usage;
    }
    catch (const ParseError& e)
    {
        err << "keyauth: corrupt authentication ring: " << e.what() << '\n';
        return exit_code(e.code());
    }
    catch (const Error& e)
    {
        err << "keyauth: " << to_string(e.code()) << ": " << e.what() << '\n';
        return exit_code(e.code());
    }
    catch (const std::exception& e)
    {
        err << "keyauth: internal error: " << e.what() << '\n';
        return exit_internal;
    }
}

} // namespace keyauth::cli
