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
#ifndef WPEREF_CORE_ROOM_HPP_
#define WPEREF_CORE_ROOM_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "core/signal.hpp"

namespace wperef {

using Point3 = std::array<double, 3>;

inline constexpr double kSpeedOfSound = 343.0;  // m/s
inline constexpr double kDefaultEarlyMs = 32.0;
// The 8-tap fractional-delay kernel of a path arriving at d samples covers
// floor(d) - 3 .. floor(d) + 4. The early window starts after that, so
// early_ms = 0 keeps exactly the direct path.
inline constexpr std::size_t kDirectPathGuard = 5;

struct RoomSpec {
  Point3 dimensions{6.0, 7.0, 2.7};  // meters
  double t60 = 1.3;                  // seconds
  Point3 source{3.0, 3.5, 1.5};
  std::vector<Point3> mics;
  int sample_rate = 16000;
  // Maximum reflection order; negative means every image that arrives within
  // the response length.
  int max_order = -1;
  // Response length in seconds; 0 picks t60 plus the longest direct path.
  double rir_seconds = 0.0;
  // Random displacement of reflected images (meters), drawn from the seed.
  double image_jitter = 0.05;

  void validate() const;
  bool operator==(const RoomSpec&) const = default;
};

struct ImpulseResponse {
  std::vector<double> taps;
  std::size_t direct_path_index = 0;  // floor of the direct-path delay
  std::size_t early_late_boundary = 0;  // for kDefaultEarlyMs
};

struct RoomScene {
  RoomSpec spec;
  std::vector<ImpulseResponse> rirs;
  std::uint64_t seed = 0;

  std::size_t num_mics() const { return rirs.size(); }
  int sample_rate() const { return spec.sample_rate; }
};

// Uniform absorption from Sabine's formula, alpha = 24 ln(10) V / (c S T60).
double sabine_absorption(const RoomSpec& spec);

// Per-reflection energy loss a, energy factor exp(-a), for a response of
// 'seconds'. Starts from the Sabine coefficient and rescales it so that the
// Schroeder fit of the image model's expected decay equals t60. Uniform
// absorption in a rectangular room decays slower than Sabine's diffuse-field
// estimate, since paths running along the long axes reflect rarely.
double reflection_absorption(const RoomSpec& spec, double seconds);

// Image-source responses with per-reflection energy factor
// exp(-reflection_absorption). Reflections pass through a 50 Hz DC blocker;
// the direct path does not. Fails with kRoomTooDead when the Sabine
// coefficient is >= 1.
RoomScene simulate_rir(const RoomSpec& spec, std::uint64_t seed);

// Wraps measured responses. The direct path is taken at the absolute peak.
RoomScene scene_from_rirs(const MultichannelTimeSignal& rirs);

// Channel m is dry convolved with h_m, length dry + rir - 1.
MultichannelTimeSignal render_scene(const RoomScene& scene, const TimeSignal& dry,
                                    std::size_t threads = 1);

std::size_t early_boundary(const ImpulseResponse& ir, int sample_rate, double early_ms);

// dry convolved with h_r truncated at early_boundary; same length as the
// rendered channel.
TimeSignal direct_early_target(const RoomScene& scene, const TimeSignal& dry,
                               std::size_t r, double early_ms);

// Early-to-late energy ratio of h_r in dB; +infinity without late energy.
double elr_oracle(const RoomScene& scene, std::size_t r, double early_ms);

double distance(const Point3& a, const Point3& b);

}  // namespace wperef

#endif  // WPEREF_CORE_ROOM_HPP_
