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

#include "stainscope/color.h"

#include <algorithm>
#include <cmath>

namespace stainscope {

Hsv rgb_to_hsv(Rgb8 rgb) {
  const int r = rgb.r, g = rgb.g, b = rgb.b;
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int d = mx - mn;
  Hsv out;
  out.v = static_cast<float>(mx / 255.0);
  out.s = mx == 0 ? 0.0f : static_cast<float>(static_cast<double>(d) / mx);
  if (d == 0) {
    out.h = 0.0f;
    return out;
  }
  // Integer numerators keep lattice hues such as 20 degrees exact.
  double h;
  if (mx == r) {
    h = 60.0 * (g - b) / d;
    if (h < 0.0) h += 360.0;
  } else if (mx == g) {
    h = 60.0 * (b - r) / d + 120.0;
  } else {
    h = 60.0 * (r - g) / d + 240.0;
  }
  float hf = static_cast<float>(h);
  if (hf >= 360.0f) hf = 0.0f;
  out.h = hf;
  return out;
}

Rgb8 hsv_to_rgb(Hsv hsv) {
  const bool ok = hsv.h >= 0.0f && hsv.h < 360.0f && hsv.s >= 0.0f && hsv.s <= 1.0f &&
                  hsv.v >= 0.0f && hsv.v <= 1.0f;
  require(ok, ErrorKind::kInvalidInput, "hsv component out of range");
  const double v = hsv.v, s = hsv.s;
  const double sector = hsv.h / 60.0;
  const int i = std::min(5, static_cast<int>(std::floor(sector)));
  const double f = sector - i;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r = 0, g = 0, b = 0;
  switch (i) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  auto to8 = [](double x) {
    return static_cast<uint8_t>(std::clamp(std::lround(x * 255.0), 0L, 255L));
  };
  return {to8(r), to8(g), to8(b)};
}

HsvImage rgb_to_hsv(const Image& img) {
  require(img.channels() == 3, ErrorKind::kInvalidInput, "rgb_to_hsv expects a 3-channel image");
  HsvImage out(img.width(), img.height());
  const auto data = img.data();
  for (size_t i = 0; i < out.pixel_count(); ++i) {
    const Hsv px = rgb_to_hsv(Rgb8{data[3 * i], data[3 * i + 1], data[3 * i + 2]});
    out.hue[i] = px.h;
    out.saturation[i] = px.s;
    out.value[i] = px.v;
  }
  return out;
}

Image hsv_to_rgb(const HsvImage& img) {
  Image out(img.width, img.height, 3);
  auto data = out.data();
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb8 px = hsv_to_rgb(Hsv{img.hue[i], img.saturation[i], img.value[i]});
    data[3 * i] = px.r;
    data[3 * i + 1] = px.g;
    data[3 * i + 2] = px.b;
  }
  return out;
}

bool HueBand::contains(const Hsv& px) const {
  if (px.s < sat_min || px.v < val_min) return false;
  const double span = hi - lo;
  if (span < 0.0) return false;
  if (span >= 360.0) return true;
  double start = std::fmod(lo, 360.0);
  if (start < 0.0) start += 360.0;
  const double end = start + span;
  const double h = px.h;
  return (h >= start && h <= end) || (h + 360.0 >= start && h + 360.0 <= end);
}

size_t count_hue_band(const HsvImage& img, const HueBand& band) {
  size_t n = 0;
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    if (band.contains(Hsv{img.hue[i], img.saturation[i], img.value[i]})) ++n;
  }
  return n;
}

size_t count_hue_band(const Image& img, const HueBand& band) {
  require(img.channels() == 3, ErrorKind::kInvalidInput, "count_hue_band expects a 3-channel image");
  const auto data = img.data();
  size_t n = 0;
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    if (band.contains(rgb_to_hsv(Rgb8{data[3 * i], data[3 * i + 1], data[3 * i + 2]}))) ++n;
  }
  return n;
}

}  // namespace stainscope
