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

#include "deltadit/image_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "deltadit/analysis.hpp"
#include "deltadit/error.hpp"

namespace deltadit {

void write_pnm(const Tensor& img, const std::filesystem::path& path) {
  Tensor chw = img.rank() == 2 ? img.reshaped({1, img.dim(0), img.dim(1)}) : img;
  if (chw.rank() != 3 || (chw.dim(0) != 1 && chw.dim(0) != 3)) {
    throw ShapeError("write_pnm: need 1 or 3 channels, got " + shape_str(img.shape()));
  }
  const auto c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << (c == 1 ? "P5" : "P6") << "\n" << w << " " << h << "\n255\n";
  std::string pixels;
  pixels.reserve(static_cast<std::size_t>(c * h * w));
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      for (std::int64_t k = 0; k < c; ++k) {
        const auto v = std::lround(to_pixel(chw[static_cast<std::size_t>((k * h + y) * w + x)]));
        pixels.push_back(static_cast<char>(static_cast<unsigned char>(v)));
      }
  out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw FormatError("write failed: " + path.string());
}

Tensor read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) { return FormatError(path.string() + ": " + why); };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    std::int64_t v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos++] - '0');
      any = true;
      if (v > (1 << 20)) throw fail("header value too large");
    }
    if (!any) throw fail("malformed header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) throw fail("not a binary PGM/PPM");
  const std::int64_t c = bytes[1] == '5' ? 1 : 3;
  pos = 2;
  const auto w = number();
  const auto h = number();
  const auto maxval = number();
  if (w < 1 || h < 1) throw fail("empty image");
  if (maxval != 255) throw fail("only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) throw fail("malformed header");
  ++pos;
  const auto need = static_cast<std::size_t>(c * h * w);
  if (bytes.size() - pos != need) throw fail("pixel payload has wrong size");
  Tensor img({c, h, w});
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      for (std::int64_t k = 0; k < c; ++k) {
        const auto p = static_cast<unsigned char>(bytes[pos++]);
        img[static_cast<std::size_t>((k * h + y) * w + x)] = static_cast<float>(p / 127.5 - 1.0);
      }
  return img;
}

}  // namespace deltadit
