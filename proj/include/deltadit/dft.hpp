/* Copyright 2026 The Delta-DiT Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "deltadit/tensor.hpp"

namespace deltadit {

// Unnormalized 2-D spectrum, row-major [height x width], bin (ky, kx).
struct Spectrum {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::complex<double>> bins;

  std::complex<double>& at(std::int64_t ky, std::int64_t kx) { return bins[static_cast<std::size_t>(ky * width + kx)]; }
  const std::complex<double>& at(std::int64_t ky, std::int64_t kx) const {
    return bins[static_cast<std::size_t>(ky * width + kx)];
  }
  double energy() const;
};

// Forward transform X[k] = sum_n x[n] exp(-2 pi i k n / N) along both axes.
// Direct separable evaluation in double; sizes here stay small.
Spectrum dft2(const Tensor& img);
// Inverse with the 1/(H W) factor; returns the real part.
Tensor idft2(const Spectrum& spec);
// Same inverse, complex output, so callers can check the imaginary residue.
std::vector<std::complex<double>> idft2_complex(const Spectrum& spec);

// Normalized radial frequency of bin (ky, kx): per-axis distance to DC over the
// axis Nyquist index, combined in quadrature. 0 at DC, 1 at an axis Nyquist.
double radial_frequency(std::int64_t ky, std::int64_t kx, std::int64_t height, std::int64_t width);

}  // namespace deltadit
