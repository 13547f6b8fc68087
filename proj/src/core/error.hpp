// Copyright 2026-present the rqkit authors
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

namespace rqkit {

enum class ErrorType {
    INVALID_ARGUMENT,
    DEGENERATE_INPUT,
    FORMAT_ERROR,
    IO_ERROR,
    INTERNAL_ERROR,
};

class RqkitException : public std::runtime_error {
public:
    RqkitException(ErrorType type, const std::string& message)
        : std::runtime_error(message), type_(type) {
    }

    ErrorType
    type() const noexcept {
        return type_;
    }

private:
    ErrorType type_;
};

[[noreturn]] inline void
throw_invalid(const std::string& message) {
    throw RqkitException(ErrorType::INVALID_ARGUMENT, message);
}

[[noreturn]] inline void
throw_degenerate(const std::string& message) {
    throw RqkitException(ErrorType::DEGENERATE_INPUT, message);
}

[[noreturn]] inline void
throw_format(const std::string& message) {
    throw RqkitException(ErrorType::FORMAT_ERROR, message);
}

[[noreturn]] inline void
throw_io(const std::string& message) {
    throw RqkitException(ErrorType::IO_ERROR, message);
}

}  // namespace rqkit
