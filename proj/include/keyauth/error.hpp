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

#include <stdexcept>
#include <string>
#include <string_view>

namespace keyauth {

/// Stable error discriminants. The numeric values are part of the public contract.
enum class ErrorCode : int
{
    malformed_key = 1,
    parameter = 2,
    generation = 3,
    fingerprint_conflict = 4,
    illegal_method = 5,
    parse = 6,
    publish = 7,
    store_unavailable = 8,
    fingerprint_mismatch = 9,
    signature_invalid = 10,
    key_changed_warning = 11,
    missing_key = 12,
    missing_record = 13,
    comparison_failed = 14,
    init = 15,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what)
        , code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace keyauth
