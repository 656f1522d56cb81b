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

#ifndef WKWS_SRC_FFT_H_
#define WKWS_SRC_FFT_H_

#include <complex>
#include <span>

namespace wkws::internal {

// Owns an FFTW real-to-complex / complex-to-real plan pair for one size.
// An instance is not safe to share between threads; construct one per
// thread (plan creation itself is serialized internally).
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // input: n real values. output: n/2+1 complex bins, unnormalized.
  void Forward(std::span<const double> input,
               std::span<std::complex<double>> output);

  // input: n/2+1 bins. output: n real values scaled by 1/n.
  void Inverse(std::span<const std::complex<double>> input,
               std::span<double> output);

 private:
  int n_;
  double* real_;
  void* spec_;
  void* forward_;
  void* inverse_;
};

}  // namespace wkws::internal

#endif  // WKWS_SRC_FFT_H_
