// Copyright 2026 The wkws Authors.
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

#include "fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace wkws::internal {
namespace {

std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  real_ = fftw_alloc_real(n);
  auto* spec = fftw_alloc_complex(n / 2 + 1);
  spec_ = spec;
  forward_ = fftw_plan_dft_r2c_1d(n, real_, spec, FFTW_ESTIMATE);
  inverse_ = fftw_plan_dft_c2r_1d(n, spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_));
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::Forward(std::span<const double> input,
                      std::span<std::complex<double>> output) {
  std::copy(input.begin(), input.begin() + n_, real_);
  fftw_execute(static_cast<fftw_plan>(forward_));
  const auto* spec = static_cast<const fftw_complex*>(spec_);
  for (int k = 0; k < bins(); ++k) output[k] = {spec[k][0], spec[k][1]};
}

void RealFft::Inverse(std::span<const std::complex<double>> input,
                      std::span<double> output) {
  auto* spec = static_cast<fftw_complex*>(spec_);
  for (int k = 0; k < bins(); ++k) {
    spec[k][0] = input[k].real();
    spec[k][1] = input[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(inverse_));
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) output[i] = real_[i] * scale;
}

}  // namespace wkws::internal
