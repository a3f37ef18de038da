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

#include <keyauth/error.hpp>

#include <iosfwd>

namespace keyauth::cli {

/// Process exit codes. Each error class has exactly one.
enum ExitCode : int
{
    exit_ok = 0,
    exit_internal = 1,
    exit_fingerprint_mismatch = 2,
    exit_signature_invalid = 3,
    exit_key_changed = 4,
    exit_missing_key = 5,
    exit_missing_record = 6,
    exit_comparison_failed = 7,
    exit_store_unavailable = 8,
    exit_init = 9,
    exit_corrupt_ring = 10,
    exit_malformed_key = 11,
    exit_parameter = 12,
    exit_publish = 13,
    exit_generation = 14,
    exit_fingerprint_conflict = 15,
    exit_illegal_method = 16,
    exit_simulation_failed = 20,
    exit_usage = 64,
};

int exit_code(ErrorCode code);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace keyauth::cli
