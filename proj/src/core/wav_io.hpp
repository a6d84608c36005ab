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
#ifndef WPEREF_CORE_WAV_IO_HPP_
#define WPEREF_CORE_WAV_IO_HPP_

#include <string>

#include "core/signal.hpp"

namespace wperef {

enum class WavFormat { kPcm16, kFloat32 };

// Reads 16-bit PCM or 32-bit float RIFF/WAVE (plain or extensible header),
// any channel count and sample rate. Samples are scaled to [-1, 1).
MultichannelTimeSignal read_wav(const std::string& path);

// Writing 16-bit PCM with samples outside [-1, 1] fails with kClipping unless
// clamp is set. Float output is written as-is.
void write_wav(const std::string& path, const MultichannelTimeSignal& signal,
               WavFormat format, bool clamp = false);

}  // namespace wperef

#endif  // WPEREF_CORE_WAV_IO_HPP_
