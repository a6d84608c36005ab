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
#ifndef WPEREF_CORE_FFT_HPP_
#define WPEREF_CORE_FFT_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace wperef {

// One-sided real FFT of fixed length backed by FFTW. Plans are created with
// FFTW_ESTIMATE so results do not depend on planner timing. An instance owns
// scratch buffers and must not be shared between threads; construction is
// thread-safe.
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& other) noexcept;
  RealFft& operator=(RealFft&& other) noexcept;

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  // Unnormalized forward transform. in.size() <= size(); the rest is zero.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse: inverse(forward(x)) == size() * x.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  void release();

  std::size_t size_ = 0;
  double* real_ = nullptr;
  std::complex<double>* spectrum_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

std::size_t next_pow2(std::size_t n);

// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

}  // namespace wperef

#endif  // WPEREF_CORE_FFT_HPP_
