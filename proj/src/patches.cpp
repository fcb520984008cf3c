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

#include "stainscope/patches.h"

#include <algorithm>
#include <cstdlib>

#include "stainscope/rng.h"

namespace stainscope {
namespace {

void check_geometry(const Image& img, const BinaryMask& border) {
  require(img.width() >= kPatchSize && img.height() >= kPatchSize, ErrorKind::kInvalidInput,
          "image must be at least 256x256 to extract patches");
  require(border.width() == img.width() && border.height() == img.height(),
          ErrorKind::kInvalidInput, "border mask dimensions differ from image");
}

Patch make_patch(const Image& img, PixelPoint center, const std::string& slide_id) {
  const PixelPoint origin = patch_origin(center, img.width(), img.height());
  return Patch{img.crop(origin.x, origin.y, kPatchSize, kPatchSize), origin, slide_id};
}

}  // namespace

std::vector<PixelPoint> border_patch_centers(const BinaryMask& border, int stride) {
  require(stride >= 1, ErrorKind::kInvalidInput, "stride must be >= 1");
  std::vector<PixelPoint> centers;
  for (int y = 0; y < border.height(); ++y) {
    for (int x = 0; x < border.width(); ++x) {
      if (!border.get(x, y)) continue;
      const bool far = std::all_of(centers.begin(), centers.end(), [&](const PixelPoint& c) {
        return std::max(std::abs(c.x - x), std::abs(c.y - y)) >= stride;
      });
      if (far) centers.push_back({x, y});
    }
  }
  return centers;
}

PixelPoint patch_origin(PixelPoint center, int image_width, int image_height) {
  const int half = kPatchSize / 2;
  return {std::clamp(center.x - half, 0, image_width - kPatchSize),
          std::clamp(center.y - half, 0, image_height - kPatchSize)};
}

std::vector<Patch> extract_border_patches(const Image& img, const BinaryMask& border, int stride,
                                          const std::string& slide_id) {
  check_geometry(img, border);
  std::vector<Patch> patches;
  for (const PixelPoint& c : border_patch_centers(border, stride)) {
    patches.push_back(make_patch(img, c, slide_id));
  }
  return patches;
}

std::vector<Patch> random_border_crops(const Image& img, const BinaryMask& border, int n,
                                       uint64_t seed, const std::string& slide_id) {
  require(n >= 0, ErrorKind::kInvalidInput, "crop count must be >= 0");
  check_geometry(img, border);
  if (n == 0) return {};
  std::vector<PixelPoint> support;
  for (int y = 0; y < border.height(); ++y) {
    for (int x = 0; x < border.width(); ++x) {
      if (border.get(x, y)) support.push_back({x, y});
    }
  }
  require(!support.empty(), ErrorKind::kEmptyBorder, "border mask has no pixels for slide " + slide_id);
  Rng rng(seed);
  std::vector<Patch> patches;
  patches.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto idx = rng.uniform_int(0, static_cast<int64_t>(support.size()) - 1);
    patches.push_back(make_patch(img, support[static_cast<size_t>(idx)], slide_id));
  }
  return patches;
}

std::string patch_filename(const Patch& patch) { return patch.id() + ".png"; }

}  // namespace stainscope
