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

#include "deltadit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deltadit/dft.hpp"
#include "deltadit/error.hpp"

namespace deltadit {

namespace {

// Splits [h x w] or [c x h x w] into per-channel [h x w] planes.
std::vector<Tensor> planes(const Tensor& img, const char* what) {
  if (img.rank() == 2) return {img};
  if (img.rank() != 3) throw ShapeError(std::string(what) + ": expected [h x w] or [c x h x w], got " + shape_str(img.shape()));
  std::vector<Tensor> out;
  for (std::int64_t c = 0; c < img.dim(0); ++c) out.push_back(img.slice_rows(c, c + 1).reshaped({img.dim(1), img.dim(2)}));
  return out;
}

void check_cutoff(double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw ConfigError("cutoff fraction must lie in (0, 1)");
}

}  // namespace

double to_pixel(float v) { return (std::clamp(static_cast<double>(v), -1.0, 1.0) + 1.0) * 127.5; }

double avg_gradient(const Tensor& img) {
  const auto chans = planes(img, "avg_gradient");
  const auto h = chans.front().dim(0), w = chans.front().dim(1);
  if (h < 3 || w < 3) throw ShapeError("avg_gradient: image must be at least 3x3, got " + shape_str(img.shape()));
  double total = 0.0;
  for (const auto& p : chans) {
    auto px = [&](std::int64_t y, std::int64_t x) { return to_pixel(p.at(y, x)); };
    double sum = 0.0;
    for (std::int64_t y = 1; y + 1 < h; ++y) {
      for (std::int64_t x = 1; x + 1 < w; ++x) {
        const double gx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                          (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
        const double gy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                          (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
        sum += std::sqrt(gx * gx + gy * gy);
      }
    }
    total += sum / static_cast<double>((h - 2) * (w - 2));
  }
  return total / static_cast<double>(chans.size());
}

double high_freq_error(const Tensor& img, const Tensor& ref, double cutoff_fraction) {
  check_same_shape(img, ref, "high_freq_error");
  check_cutoff(cutoff_fraction);
  const auto a = planes(img, "high_freq_error");
  const auto b = planes(ref, "high_freq_error");
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const Spectrum fa = dft2(a[c]);
    const Spectrum fb = dft2(b[c]);
    for (std::int64_t ky = 0; ky < fa.height; ++ky) {
      for (std::int64_t kx = 0; kx < fa.width; ++kx) {
        if (radial_frequency(ky, kx, fa.height, fa.width) <= cutoff_fraction) continue;
        num += std::abs(fa.at(ky, kx) - fb.at(ky, kx));
        den += std::abs(fb.at(ky, kx));
      }
    }
  }
  if (num == 0.0) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

Tensor high_freq_difference_image(const Tensor& a, const Tensor& b, double cutoff_fraction) {
  check_same_shape(a, b, "high_freq_difference_image");
  check_cutoff(cutoff_fraction);
  const auto diff = planes(a - b, "high_freq_difference_image");
  std::vector<float> out;
  out.reserve(a.size());
  for (const auto& p : diff) {
    Spectrum s = dft2(p);
    for (std::int64_t ky = 0; ky < s.height; ++ky)
      for (std::int64_t kx = 0; kx < s.width; ++kx)
        if (radial_frequency(ky, kx, s.height, s.width) <= cutoff_fraction) s.at(ky, kx) = 0.0;
    for (const auto& v : idft2_complex(s)) {
      if (std::abs(v.imag()) > 1e-5) throw NumericError("high-pass inverse left an imaginary residue");
      out.push_back(static_cast<float>(v.real()));
    }
  }
  return Tensor(a.shape(), std::move(out));
}

RunComparison compare_runs(const Tensor& baseline, const Tensor& cached, double cutoff_fraction) {
  check_same_shape(baseline, cached, "compare_runs");
  RunComparison r;
  r.l2 = l2_distance(baseline, cached);
  double se = 0.0;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    const double d = to_pixel(baseline[i]) - to_pixel(cached[i]);
    se += d * d;
  }
  r.mse = se / static_cast<double>(baseline.size());
  r.psnr = r.mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(255.0 * 255.0 / r.mse);
  r.avg_gradient_a = avg_gradient(baseline);
  r.avg_gradient_b = avg_gradient(cached);
  r.high_freq_error = high_freq_error(cached, baseline, cutoff_fraction);
  return r;
}

}  // namespace deltadit
