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
#ifndef WPEREF_CORE_SPEECH_HPP_
#define WPEREF_CORE_SPEECH_HPP_

#include <cstdint>

#include "core/signal.hpp"

namespace wperef {

// Deterministic speech-like test source: voiced syllables (glottal harmonics
// shaped by three random formants), fricative noise bursts and pauses under
// raised-cosine envelopes. Sparse in time-frequency the way speech is, which
// is what the sparsity prior of the dereverberation model relies on. Peak
// amplitude is 0.5.
TimeSignal synthetic_speech(double seconds, int sample_rate, std::uint64_t seed);

}  // namespace wperef

#endif  // WPEREF_CORE_SPEECH_HPP_
