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

#include <optional>
#include <vector>

#include "deltadit/tensor.hpp"

namespace deltadit {

inline constexpr double kDefaultCutoff = 0.25;

// Model-space value in [-1, 1] to the [0, 255] display range (clamped).
double to_pixel(float v);

// Mean Sobel gradient magnitude over interior pixels, measured on the [0, 255]
// display range. Kernels: Gx = [-1 0 1; -2 0 2; -1 0 1], Gy its transpose.
// Accepts [h x w] or [c x h x w] (channel mean); needs h, w >= 3.
double avg_gradient(const Tensor& img);

// High-band spectral deviation of `img` from `ref`. Both are transformed with
// dft2; bins whose radial_frequency exceeds `cutoff_fraction` are kept, and the
// result is sum |F_img - F_ref| / sum |F_ref| over the kept bins (per channel,
// summed over channels). 0 when both high bands vanish; +inf when only the
// reference's does.
double high_freq_error(const Tensor& img, const Tensor& ref, double cutoff_fraction = kDefaultCutoff);

// idft2 of the high-passed spectrum of a - b, same shape as the inputs.
// Throws NumericError if the imaginary residue exceeds 1e-5.
Tensor high_freq_difference_image(const Tensor& a, const Tensor& b, double cutoff_fraction = kDefaultCutoff);

struct RunComparison {
  double l2 = 0.0;    // Euclidean distance of the raw tensors
  double mse = 0.0;   // on the [0, 255] display range
  double psnr = 0.0;  // 255 peak; +inf for identical images
  double avg_gradient_a = 0.0;
  double avg_gradient_b = 0.0;
  double high_freq_error = 0.0;  // b measured against a
};

// Per-image metrics summary as emitted by the command-line tools.
struct MetricsReport {
  double avg_gradient = 0.0;
  std::optional<double> high_freq_error;
  std::optional<double> macs;
  std::vector<double> deviations;
};

RunComparison compare_runs(const Tensor& baseline, const Tensor& cached, double cutoff_fraction = kDefaultCutoff);

}  // namespace deltadit
