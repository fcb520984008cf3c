// Copyright 2026 The Stainscope Authors. All Rights Reserved.
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

/// @file patches.h
/// @brief Border-guided placement of 256x256 windows.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stainscope/image.h"

namespace stainscope {

/// Greedy row-major scan over border pixels: a pixel becomes a window center
/// when its Chebyshev distance to every earlier center is >= `stride`.
std::vector<PixelPoint> border_patch_centers(const BinaryMask& border, int stride = 128);

/// Origin of the 256x256 window centered at `center`, clamped to the image.
PixelPoint patch_origin(PixelPoint center, int image_width, int image_height);

std::vector<Patch> extract_border_patches(const Image& img, const BinaryMask& border,
                                          int stride = 128, const std::string& slide_id = "slide");

/// `n` windows centered on border pixels drawn uniformly with replacement.
std::vector<Patch> random_border_crops(const Image& img, const BinaryMask& border, int n,
                                       uint64_t seed, const std::string& slide_id = "slide");

/// `<slide_id>_x<origin_x>_y<origin_y>.png`
std::string patch_filename(const Patch& patch);

}  // namespace stainscope
