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

/// \file simulation.hpp
/// Scripted man-in-the-middle scenarios: two users share an in-memory store,
/// an adversary rewrites responses, and the observed alarm is compared with
/// the outcome the authentication scheme predicts.

#include <keyauth/crypto.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <deque>
#include <vector>

namespace keyauth {

enum class Scenario
{
    mitm_identity_pre,  ///< identity key (and a consistent attacker sub-key set) replaced before first contact
    mitm_identity_post, ///< identity key replaced after it was pinned
    mitm_subkey_pre,    ///< sub-key replaced before first contact
    mitm_subkey_post,   ///< sub-key replaced after it was verified
    strip_signature,    ///< signature withheld for an already verified sub-key
};

inline constexpr std::array<Scenario, 5> all_scenarios{Scenario::mitm_identity_pre, Scenario::mitm_identity_post,
    Scenario::mitm_subkey_pre, Scenario::mitm_subkey_post, Scenario::strip_signature};

/// "mitm-identity-pre" etc.
std::string_view to_string(Scenario s);
std::optional<Scenario> scenario_from_string(std::string_view name);

/// RSA generation dominates scenario cost, so runs draw sharing keys from a
/// fixed pool, round robin. Everything else is generated per run.
class SharingKeyPool
{
  public:
    explicit SharingKeyPool(std::size_t size = 4);

    const SharingKeyPair& next(EntropySource& rng);

  private:
    std::size_t size_;
    std::size_t cursor_ = 0;
    std::deque<SharingKeyPair> keys_;
};

struct ScenarioResult
{
    Scenario scenario;
    /// Outcome names: "fingerprint-mismatch", "signature-invalid", "undetected",
    /// "verified-with-1-fetch", or the error class actually raised.
    std::string expected;
    std::string observed;
    bool passed = false;
    std::vector<std::string> transcript;
};

/// Deterministic given seed, apart from the RSA keys in the pool. Variant
/// choices (sub-key type, signature handling, load order) are drawn from seed.
ScenarioResult run_scenario(Scenario scenario, std::uint64_t seed, SharingKeyPool& pool);

} // namespace keyauth
