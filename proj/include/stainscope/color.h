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

/// @file color.h
/// @brief Hexcone RGB/HSV conversion and hue-band pixel counting.

#pragma once

#include <cstdint>

#include "stainscope/image.h"

namespace stainscope {

struct Hsv {
  float h = 0.0f;  // degrees
  float s = 0.0f;
  float v = 0.0f;
};

struct Rgb8 {
  uint8_t r = 0;
  uint8_t g = 0;
  uint8_t b = 0;
  bool operator==(const Rgb8&) const = default;
};

/// Hue of achromatic pixels (max == min) is 0.
Hsv rgb_to_hsv(Rgb8 rgb);
Rgb8 hsv_to_rgb(Hsv hsv);

HsvImage rgb_to_hsv(const Image& img);
Image hsv_to_rgb(const HsvImage& img);

/// Hue interval in degrees, closed at both ends and interpreted modulo 360,
/// so [-20, 20] covers [340, 360) and [0, 20]. A span of 360 or more covers
/// the full circle.
struct HueBand {
  double lo = -20.0;
  double hi = 20.0;
  double sat_min = 0.0;
  double val_min = 0.0;

  bool contains(const Hsv& px) const;
};

/// Number of pixels with hue inside the band and passing the sat/val gates.
size_t count_hue_band(const HsvImage& img, const HueBand& band);

/// Convenience overload that converts and counts without materializing HSV.
size_t count_hue_band(const Image& img, const HueBand& band);

}  // namespace stainscope
