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

#include "core/error.hpp"

namespace wperef {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kSignalTooShort: return "signal too short";
    case ErrorCode::kUtteranceTooShort: return "utterance too short";
    case ErrorCode::kDegenerateSystem: return "degenerate system";
    case ErrorCode::kSilentChannel: return "silent channel";
    case ErrorCode::kRoomTooDead: return "room too dead for geometry";
    case ErrorCode::kMissingOracle: return "missing oracle";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kClipping: return "clipping";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace wperef
