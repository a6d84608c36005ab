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
#include "core/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <utility>

#include "core/error.hpp"

namespace wperef {
namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t size) : size_(size) {
  require(size >= 2, "fft size must be at least 2");
  std::lock_guard<std::mutex> lock(planner_mutex());
  real_ = fftw_alloc_real(size_);
  spectrum_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(bins()));
  auto* spec = reinterpret_cast<fftw_complex*>(spectrum_);
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(size_), real_, spec,
                                       FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(size_), spec, real_,
                                       FFTW_ESTIMATE);
  if (!real_ || !spectrum_ || !forward_plan_ || !inverse_plan_) {
    fail(ErrorCode::kInternal, "fftw plan creation failed");
  }
}

RealFft::~RealFft() { release(); }

RealFft::RealFft(RealFft&& other) noexcept { *this = std::move(other); }

RealFft& RealFft::operator=(RealFft&& other) noexcept {
  if (this != &other) {
    release();
    size_ = std::exchange(other.size_, 0);
    real_ = std::exchange(other.real_, nullptr);
    spectrum_ = std::exchange(other.spectrum_, nullptr);
    forward_plan_ = std::exchange(other.forward_plan_, nullptr);
    inverse_plan_ = std::exchange(other.inverse_plan_, nullptr);
  }
  return *this;
}

void RealFft::release() {
  if (!real_ && !forward_plan_) return;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(spectrum_);
  forward_plan_ = inverse_plan_ = nullptr;
  real_ = nullptr;
  spectrum_ = nullptr;
}

void RealFft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) {
  require(in.size() <= size_ && out.size() >= bins(), "fft buffer size mismatch");
  std::copy(in.begin(), in.end(), real_);
  std::fill(real_ + in.size(), real_ + size_, 0.0);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  std::copy(spectrum_, spectrum_ + bins(), out.begin());
}

void RealFft::inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  require(in.size() >= bins() && out.size() <= size_, "fft buffer size mismatch");
  std::copy(in.begin(), in.begin() + bins(), spectrum_);
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::copy(real_, real_ + out.size(), out.begin());
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(std::max<std::size_t>(out_len, 2));
  RealFft fft(n);
  std::vector<std::complex<double>> fa(fft.bins()), fb(fft.bins());
  fft.forward(a, fa);
  fft.forward(b, fb);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k] * scale;
  std::vector<double> out(out_len);
  fft.inverse(fa, out);
  return out;
}

}  // namespace wperef
