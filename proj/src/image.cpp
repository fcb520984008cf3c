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

#include "stainscope/image.h"

#include <algorithm>
#include <cstring>

namespace stainscope {

Image::Image(int width, int height, int channels, uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  require(width >= 1 && height >= 1, ErrorKind::kInvalidInput, "image dimensions must be >= 1");
  require(channels == 1 || channels == 3, ErrorKind::kInvalidInput, "image must have 1 or 3 channels");
  data_.assign(static_cast<size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  require(width >= 1 && height >= 1, ErrorKind::kInvalidInput, "image dimensions must be >= 1");
  require(channels == 1 || channels == 3, ErrorKind::kInvalidInput, "image must have 1 or 3 channels");
  require(data_.size() == static_cast<size_t>(width) * height * channels, ErrorKind::kInvalidInput,
          "image data length does not match width x height x channels");
}

Image Image::crop(int x0, int y0, int w, int h) const {
  require(x0 >= 0 && y0 >= 0 && x0 + w <= width_ && y0 + h <= height_, ErrorKind::kInvalidInput,
          "crop window outside image");
  Image out(w, h, channels_);
  const size_t row_bytes = static_cast<size_t>(w) * channels_;
  for (int y = 0; y < h; ++y) {
    std::memcpy(out.data_.data() + static_cast<size_t>(y) * row_bytes,
                data_.data() + (static_cast<size_t>(y0 + y) * width_ + x0) * channels_, row_bytes);
  }
  return out;
}

size_t BinaryMask::count() const {
  return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), uint8_t{1}));
}

std::string Patch::id() const {
  return slide_id + "_x" + std::to_string(origin.x) + "_y" + std::to_string(origin.y);
}

}  // namespace stainscope
