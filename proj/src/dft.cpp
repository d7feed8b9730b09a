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

#include "deltadit/dft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "deltadit/error.hpp"

namespace deltadit {

namespace {

using cplx = std::complex<double>;

std::vector<cplx> twiddles(std::int64_t n, double sign) {
  std::vector<cplx> w(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    const double a = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    w[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
  }
  return w;
}

// In-place 1-D transform of n values spaced `stride` apart.
void dft_strided(cplx* base, std::int64_t n, std::int64_t stride, const std::vector<cplx>& w,
                 std::vector<cplx>& scratch) {
  for (std::int64_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::int64_t j = 0; j < n; ++j) acc += base[j * stride] * w[static_cast<std::size_t>((k * j) % n)];
    scratch[static_cast<std::size_t>(k)] = acc;
  }
  for (std::int64_t k = 0; k < n; ++k) base[k * stride] = scratch[static_cast<std::size_t>(k)];
}

void transform2(std::vector<cplx>& a, std::int64_t h, std::int64_t w, double sign) {
  const auto wr = twiddles(w, sign);
  const auto wc = twiddles(h, sign);
  std::vector<cplx> scratch(static_cast<std::size_t>(std::max(h, w)));
  for (std::int64_t r = 0; r < h; ++r) dft_strided(a.data() + r * w, w, 1, wr, scratch);
  for (std::int64_t c = 0; c < w; ++c) dft_strided(a.data() + c, h, w, wc, scratch);
}

}  // namespace

double Spectrum::energy() const {
  double e = 0.0;
  for (const auto& b : bins) e += std::norm(b);
  return e;
}

Spectrum dft2(const Tensor& img) {
  if (img.rank() != 2) throw ShapeError("dft2: expected [h x w], got " + shape_str(img.shape()));
  Spectrum s{img.dim(0), img.dim(1), {}};
  s.bins.assign(img.data().begin(), img.data().end());
  transform2(s.bins, s.height, s.width, -1.0);
  return s;
}

std::vector<std::complex<double>> idft2_complex(const Spectrum& spec) {
  if (static_cast<std::int64_t>(spec.bins.size()) != spec.height * spec.width || spec.height < 1 || spec.width < 1) {
    throw ShapeError("idft2: inconsistent spectrum");
  }
  auto a = spec.bins;
  transform2(a, spec.height, spec.width, 1.0);
  const double scale = 1.0 / static_cast<double>(spec.height * spec.width);
  for (auto& v : a) v *= scale;
  return a;
}

Tensor idft2(const Spectrum& spec) {
  const auto a = idft2_complex(spec);
  Tensor out({spec.height, spec.width});
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<float>(a[i].real());
  return out;
}

double radial_frequency(std::int64_t ky, std::int64_t kx, std::int64_t height, std::int64_t width) {
  auto axis = [](std::int64_t k, std::int64_t n) {
    if (n < 2) return 0.0;
    const auto d = std::min(k, n - k);
    return static_cast<double>(d) / (static_cast<double>(n) / 2.0);
  };
  const double fy = axis(ky, height);
  const double fx = axis(kx, width);
  return std::sqrt(fy * fy + fx * fx);
}

}  // namespace deltadit
