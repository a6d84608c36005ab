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
#include "core/room.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "core/error.hpp"
#include "core/fft.hpp"
#include "core/parallel.hpp"

namespace wperef {
namespace {

constexpr int kKernelTaps = 8;

bool inside(const Point3& p, const Point3& dims) {
  for (int i = 0; i < 3; ++i) {
    if (!(p[i] > 0.0 && p[i] < dims[i])) return false;
  }
  return true;
}

// Adds a Hann-windowed sinc centred at 'delay' samples.
void add_fractional_impulse(std::vector<double>& taps, double delay, double gain) {
  const double base = std::floor(delay);
  const long first = static_cast<long>(base) - kKernelTaps / 2 + 1;
  // sin(pi (k - delay)) alternates sign with k.
  const double s = std::sin(std::numbers::pi * (static_cast<double>(first) - delay));
  double sign = 1.0;
  for (int i = 0; i < kKernelTaps; ++i, sign = -sign) {
    const long k = first + i;
    if (k < 0 || k >= static_cast<long>(taps.size())) continue;
    const double x = static_cast<double>(k) - delay;
    double sinc;
    if (std::abs(x) < 1e-12) {
      sinc = 1.0;
    } else {
      sinc = sign * s / (std::numbers::pi * x);
    }
    const double window =
        0.5 * (1.0 + std::cos(std::numbers::pi * x / (kKernelTaps / 2.0)));
    taps[static_cast<std::size_t>(k)] += gain * sinc * window;
  }
}

// All images arrive with positive gain, so dense late reflections pile up at
// low frequencies and the tail decays slower than its energy envelope. A
// one-pole DC blocker on the reflections removes that build-up.
void remove_dc(std::vector<double>& x, double fs) {
  constexpr double kCutoffHz = 50.0;
  const double pole = std::exp(-2.0 * std::numbers::pi * kCutoffHz / fs);
  double prev_in = 0.0, prev_out = 0.0;
  for (double& v : x) {
    const double out = v - prev_in + pole * prev_out;
    prev_in = v;
    prev_out = out;
    v = out;
  }
}

// Expected energy envelope of the image model: an image at distance r in
// direction u has reflection order close to r * sum_i |u_i| / L_i, so with
// per-reflection energy exp(-a) the late energy arriving at time t averages
// exp(-a c t s(u)) over directions. Returns the T60 a -5..-35 dB Schroeder fit
// reads off that envelope for a response of 'seconds'.
double envelope_t60(const Point3& dims, double a, double seconds) {
  constexpr int kAngles = 24;
  constexpr int kTimes = 256;
  std::vector<double> rate, weight;
  for (int i = 0; i < kAngles; ++i) {
    const double theta = (i + 0.5) * std::numbers::pi / (2 * kAngles);
    for (int j = 0; j < kAngles; ++j) {
      const double phi = (j + 0.5) * std::numbers::pi / (2 * kAngles);
      const Point3 u{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                     std::cos(theta)};
      rate.push_back(a * kSpeedOfSound * (u[0] / dims[0] + u[1] / dims[1] + u[2] / dims[2]));
      weight.push_back(std::sin(theta));
    }
  }
  std::vector<double> edc(kTimes);
  for (int k = 0; k < kTimes; ++k) {
    const double t = seconds * k / kTimes;
    double e = 0.0;
    for (std::size_t d = 0; d < rate.size(); ++d) {
      e += weight[d] * (std::exp(-rate[d] * t) - std::exp(-rate[d] * seconds)) / rate[d];
    }
    edc[static_cast<std::size_t>(k)] = e;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, n = 0.0;
  for (int k = 0; k < kTimes; ++k) {
    const double db = 10.0 * std::log10(edc[static_cast<std::size_t>(k)] / edc[0]);
    if (db > -5.0 || db < -35.0) continue;
    const double t = seconds * k / kTimes;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    n += 1.0;
  }
  if (n < 2.0) return 0.0;
  return -60.0 * (n * sxx - sx * sx) / (n * sxy - sx * sy);
}

}  // namespace

double reflection_absorption(const RoomSpec& spec, double seconds) {
  const double alpha = sabine_absorption(spec);
  // T60 scales as 1/a apart from the truncation at 'seconds', so a few
  // fixed-point steps settle the factor.
  double a = alpha;
  for (int it = 0; it < 8; ++it) {
    const double measured = envelope_t60(spec.dimensions, a, seconds);
    if (!(measured > 0.0)) return alpha;
    a *= measured / spec.t60;
  }
  return a;
}

double distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void RoomSpec::validate() const {
  for (double d : dimensions) require(d > 0.0, "room dimensions must be positive");
  require(t60 > 0.0, "t60 must be positive");
  require(sample_rate > 0, "sample rate must be positive");
  require(!mics.empty(), "room needs at least one microphone");
  require(inside(source, dimensions), "source must lie strictly inside the room");
  for (const auto& m : mics) {
    require(inside(m, dimensions), "microphones must lie strictly inside the room");
  }
  require(rir_seconds >= 0.0, "rir length must be non-negative");
  require(image_jitter >= 0.0, "image jitter must be non-negative");
}

double sabine_absorption(const RoomSpec& spec) {
  const auto& d = spec.dimensions;
  const double volume = d[0] * d[1] * d[2];
  const double surface = 2.0 * (d[0] * d[1] + d[1] * d[2] + d[0] * d[2]);
  return 24.0 * std::log(10.0) * volume / (kSpeedOfSound * surface * spec.t60);
}

RoomScene simulate_rir(const RoomSpec& spec, std::uint64_t seed) {
  spec.validate();
  const double alpha = sabine_absorption(spec);
  if (alpha >= 1.0) {
    fail(ErrorCode::kRoomTooDead, "room too dead for geometry: Sabine absorption " +
                                      std::to_string(alpha) + " >= 1");
  }
  const double fs = spec.sample_rate;

  double longest_direct = 0.0;
  for (const auto& m : spec.mics) longest_direct = std::max(longest_direct, distance(spec.source, m));
  const double seconds =
      spec.rir_seconds > 0.0 ? spec.rir_seconds : spec.t60 + longest_direct / kSpeedOfSound;
  const double beta = std::exp(-0.5 * reflection_absorption(spec, seconds));
  const std::size_t length = static_cast<std::size_t>(std::ceil(seconds * fs)) + kKernelTaps;
  const double max_distance = static_cast<double>(length) / fs * kSpeedOfSound;

  RoomScene scene;
  scene.spec = spec;
  scene.seed = seed;
  scene.rirs.resize(spec.mics.size());

  const auto& dims = spec.dimensions;
  const auto& src = spec.source;
  for (std::size_t mi = 0; mi < spec.mics.size(); ++mi) {
    const Point3& mic = spec.mics[mi];
    // One random stream per microphone.
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + mi);
    std::uniform_real_distribution<double> jitter(-spec.image_jitter, spec.image_jitter);

    ImpulseResponse ir;
    ir.taps.assign(length, 0.0);
    std::vector<double> reflections(length, 0.0);
    std::array<long, 3> reach;
    for (int a = 0; a < 3; ++a) {
      reach[a] = static_cast<long>(std::ceil(max_distance / (2.0 * dims[a]))) + 1;
    }
    for (long nx = -reach[0]; nx <= reach[0]; ++nx) {
      for (int qx = 0; qx < 2; ++qx) {
        const double px = (1 - 2 * qx) * src[0] + 2.0 * nx * dims[0] - mic[0];
        const long ox = std::labs(nx - qx) + std::labs(nx);
        if (std::abs(px) > max_distance) continue;
        for (long ny = -reach[1]; ny <= reach[1]; ++ny) {
          for (int qy = 0; qy < 2; ++qy) {
            const double py = (1 - 2 * qy) * src[1] + 2.0 * ny * dims[1] - mic[1];
            const long oy = std::labs(ny - qy) + std::labs(ny);
            const double pxy = px * px + py * py;
            if (pxy > max_distance * max_distance) continue;
            for (long nz = -reach[2]; nz <= reach[2]; ++nz) {
              for (int qz = 0; qz < 2; ++qz) {
                const double pz = (1 - 2 * qz) * src[2] + 2.0 * nz * dims[2] - mic[2];
                const long oz = std::labs(nz - qz) + std::labs(nz);
                const long order = ox + oy + oz;
                if (spec.max_order >= 0 && order > spec.max_order) continue;
                double dist = std::sqrt(pxy + pz * pz);
                if (dist > max_distance) continue;
                if (order > 0 && spec.image_jitter > 0.0) dist += jitter(rng);
                dist = std::max(dist, 1e-3);
                const double gain =
                    std::pow(beta, static_cast<double>(order)) / (4.0 * std::numbers::pi * dist);
                add_fractional_impulse(order == 0 ? ir.taps : reflections,
                                       dist / kSpeedOfSound * fs, gain);
              }
            }
          }
        }
      }
    }
    remove_dc(reflections, fs);
    for (std::size_t t = 0; t < length; ++t) ir.taps[t] += reflections[t];
    const double direct_delay = distance(src, mic) / kSpeedOfSound * fs;
    ir.direct_path_index = static_cast<std::size_t>(std::floor(direct_delay));
    ir.early_late_boundary = early_boundary(ir, spec.sample_rate, kDefaultEarlyMs);
    scene.rirs[mi] = std::move(ir);
  }
  return scene;
}

RoomScene scene_from_rirs(const MultichannelTimeSignal& rirs) {
  rirs.validate();
  RoomScene scene;
  scene.spec.sample_rate = rirs.sample_rate();
  scene.spec.mics.assign(rirs.num_channels(), Point3{0.0, 0.0, 0.0});
  scene.spec.t60 = 0.0;
  for (const auto& ch : rirs.channels) {
    ImpulseResponse ir;
    ir.taps = ch.samples;
    std::size_t peak = 0;
    for (std::size_t t = 0; t < ir.taps.size(); ++t) {
      if (std::abs(ir.taps[t]) > std::abs(ir.taps[peak])) peak = t;
    }
    ir.direct_path_index = peak;
    ir.early_late_boundary = early_boundary(ir, scene.spec.sample_rate, kDefaultEarlyMs);
    scene.rirs.push_back(std::move(ir));
  }
  return scene;
}

MultichannelTimeSignal render_scene(const RoomScene& scene, const TimeSignal& dry,
                                    std::size_t threads) {
  dry.validate();
  require(!scene.rirs.empty(), "scene has no impulse responses");
  MultichannelTimeSignal out;
  out.channels.resize(scene.rirs.size());
  parallel_for(scene.rirs.size(), threads, [&](std::size_t m) {
    out.channels[m].sample_rate = dry.sample_rate;
    out.channels[m].samples = convolve(dry.samples, scene.rirs[m].taps);
  });
  return out;
}

std::size_t early_boundary(const ImpulseResponse& ir, int sample_rate, double early_ms) {
  require(early_ms >= 0.0, "early window must be non-negative");
  const auto early = static_cast<std::size_t>(std::lround(early_ms * sample_rate / 1000.0));
  return ir.direct_path_index + kDirectPathGuard + early;
}

TimeSignal direct_early_target(const RoomScene& scene, const TimeSignal& dry,
                               std::size_t r, double early_ms) {
  require(r < scene.rirs.size(), "microphone index out of range");
  dry.validate();
  const auto& ir = scene.rirs[r];
  const std::size_t cut = std::min(early_boundary(ir, scene.sample_rate(), early_ms), ir.taps.size());
  std::vector<double> truncated(ir.taps.begin(), ir.taps.end());
  std::fill(truncated.begin() + static_cast<std::ptrdiff_t>(cut), truncated.end(), 0.0);
  TimeSignal out;
  out.sample_rate = dry.sample_rate;
  out.samples = convolve(dry.samples, truncated);
  return out;
}

double elr_oracle(const RoomScene& scene, std::size_t r, double early_ms) {
  require(r < scene.rirs.size(), "microphone index out of range");
  const auto& taps = scene.rirs[r].taps;
  const std::size_t cut =
      std::min(early_boundary(scene.rirs[r], scene.sample_rate(), early_ms), taps.size());
  double early = 0.0, late = 0.0;
  for (std::size_t t = 0; t < taps.size(); ++t) (t < cut ? early : late) += taps[t] * taps[t];
  if (late <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(early / late);
}

}  // namespace wperef
