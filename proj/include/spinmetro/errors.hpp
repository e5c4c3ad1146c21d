// Copyright 2026 The spinmetro Authors
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

namespace spinmetro {

enum class ErrorCode {
    invalid_dimension,
    non_hermitian,
    dimension_mismatch,
    unsupported,
    invalid_argument,
    ill_conditioned,
    no_crossing,
    basis_deficit,
    invalid_config,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_dimension: return "invalid_dimension";
        case ErrorCode::non_hermitian: return "non_hermitian";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::unsupported: return "unsupported";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::ill_conditioned: return "ill_conditioned";
        case ErrorCode::no_crossing: return "no_crossing";
        case ErrorCode::basis_deficit: return "basis_deficit";
        case ErrorCode::invalid_config: return "invalid_config";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

}  // namespace detail
}  // namespace spinmetro
