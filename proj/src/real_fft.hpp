// Copyright 2026 The fvae Authors. All Rights Reserved.
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

#ifndef FVAE_SRC_REAL_FFT_HPP_
#define FVAE_SRC_REAL_FFT_HPP_

#include <fftw3.h>

#include <complex>

namespace fvae {

// Owns an FFTW r2c/c2r plan pair for one transform size.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    spec_ = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    forward_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* real() { return real_; }
  std::complex<double>* spectrum() {
    return reinterpret_cast<std::complex<double>*>(spec_);
  }
  void Forward() { fftw_execute(forward_); }
  // Unnormalised, as FFTW: the result is scaled by n.
  void Inverse() { fftw_execute(inverse_); }
  int size() const { return n_; }

 private:
  int n_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

}  // namespace fvae

#endif  // FVAE_SRC_REAL_FFT_HPP_
