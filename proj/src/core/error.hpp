// Copyright 2026 The wperef Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WPEREF_CORE_ERROR_HPP_
#define WPEREF_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace wperef {

// Numeric values are mirrored by wperef_status in the public C header.
enum class ErrorCode {
  kOk = 0,
  kInvalidArgument = 1,
  kSignalTooShort = 2,
  kUtteranceTooShort = 3,
  kDegenerateSystem = 4,
  kSilentChannel = 5,
  kRoomTooDead = 6,
  kMissingOracle = 7,
  kIo = 8,
  kClipping = 9,
  kConfig = 10,
  kInternal = 11,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace wperef

#endif  // WPEREF_CORE_ERROR_HPP_
