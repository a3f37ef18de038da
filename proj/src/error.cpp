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

#include <keyauth/error.hpp>

namespace keyauth {

std::string_view to_string(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::malformed_key: return "malformed-key";
        case ErrorCode::parameter: return "parameter";
        case ErrorCode::generation: return "generation";
        case ErrorCode::fingerprint_conflict: return "fingerprint-conflict";
        case ErrorCode::illegal_method: return "illegal-method";
        case ErrorCode::parse: return "parse";
        case ErrorCode::publish: return "publish";
        case ErrorCode::store_unavailable: return "store-unavailable";
        case ErrorCode::fingerprint_mismatch: return "fingerprint-mismatch";
        case ErrorCode::signature_invalid: return "signature-invalid";
        case ErrorCode::key_changed_warning: return "key-changed-warning";
        case ErrorCode::missing_key: return "missing-key";
        case ErrorCode::missing_record: return "missing-record";
        case ErrorCode::comparison_failed: return "comparison-failed";
        case ErrorCode::init: return "init";
    }
    return "unknown";
}

} // namespace keyauth
