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

/// @file image.h
/// @brief Raster containers: 8-bit images, HSV planes, binary masks, patches.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stainscope/error.h"

namespace stainscope {

/// Row-major interleaved 8-bit raster with 1 (gray/mask) or 3 (RGB) channels.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, uint8_t fill = 0);
  Image(int width, int height, int channels, std::vector<uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }
  bool empty() const { return data_.empty(); }

  uint8_t& at(int x, int y, int c = 0) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  uint8_t at(int x, int y, int c = 0) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<uint8_t> data() { return data_; }
  std::span<const uint8_t> data() const { return data_; }

  /// Copies the w x h window at (x0, y0); the window must lie inside the image.
  Image crop(int x0, int y0, int w, int h) const;

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<uint8_t> data_;
};

/// Per-pixel hue in degrees [0, 360), saturation and value in [0, 1].
struct HsvImage {
  int width = 0;
  int height = 0;
  std::vector<float> hue;
  std::vector<float> saturation;
  std::vector<float> value;

  HsvImage() = default;
  HsvImage(int w, int h)
      : width(w),
        height(h),
        hue(static_cast<size_t>(w) * h),
        saturation(static_cast<size_t>(w) * h),
        value(static_cast<size_t>(w) * h) {}

  size_t pixel_count() const { return hue.size(); }
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false)
      : width_(width),
        height_(height),
        bits_(static_cast<size_t>(width) * height, fill ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return bits_.size(); }

  bool get(int x, int y) const { return bits_[static_cast<size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v = true) {
    bits_[static_cast<size_t>(y) * width_ + x] = v ? 1 : 0;
  }
  bool operator[](size_t i) const { return bits_[i] != 0; }

  size_t count() const;
  bool any() const { return count() > 0; }

  std::span<uint8_t> bits() { return bits_; }
  std::span<const uint8_t> bits() const { return bits_; }

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> bits_;
};

struct PixelPoint {
  int x = 0;
  int y = 0;
  bool operator==(const PixelPoint&) const = default;
};

inline constexpr int kPatchSize = 256;

/// A 256x256 RGB window cut from a slide.
struct Patch {
  Image image;
  PixelPoint origin;
  std::string slide_id;

  PixelPoint center() const { return {origin.x + kPatchSize / 2, origin.y + kPatchSize / 2}; }
  /// `<slide_id>_x<origin_x>_y<origin_y>`
  std::string id() const;
};

}  // namespace stainscope
