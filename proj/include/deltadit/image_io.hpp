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

#include <filesystem>

#include "deltadit/tensor.hpp"

namespace deltadit {

// Binary PGM (P5) for one channel, PPM (P6) for three. Values map linearly
// from clamp(x, -1, 1) to [0, 255], rounded to nearest.
void write_pnm(const Tensor& img, const std::filesystem::path& path);
// Returns [c x h x w] in [-1, 1]; maxval must be 255.
Tensor read_pnm(const std::filesystem::path& path);

}  // namespace deltadit
