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

/// @file morphology.h
/// @brief Tissue masking and binary morphology with square structuring elements.
///
/// All operators replicate edge pixels outside the raster, so a constant mask
/// has identical dilation and erosion.

#pragma once

#include <optional>

#include "stainscope/image.h"

namespace stainscope {

/// ITU-R BT.601 luma, rounded to 8 bits.
Image to_gray(const Image& rgb);

/// Otsu threshold on an 8-bit gray image; pixels <= threshold form the dark
/// class. Empty when the histogram has a single occupied level.
std::optional<int> otsu_threshold(const Image& gray);

struct TissueMaskOptions {
  int min_area = 64;  // connected components below this many pixels are dropped
};

struct TissueMask {
  BinaryMask mask;
  bool degenerate = false;  // uniform input, Otsu undefined
};

/// Dark-on-bright tissue segmentation: Otsu threshold, 3x3 opening, then
/// removal of 8-connected components smaller than `min_area`.
TissueMask tissue_mask(const Image& img, const TissueMaskOptions& options = {});

BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask erode(const BinaryMask& mask, int radius);
BinaryMask opening(const BinaryMask& mask, int radius);

/// dilate XOR erode with a (2r+1)x(2r+1) square.
BinaryMask morphological_gradient(const BinaryMask& mask, int se_radius = 1);

BinaryMask remove_small_components(const BinaryMask& mask, size_t min_area);

}  // namespace stainscope
