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

#include "stainscope/morphology.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "stainscope/log.h"

namespace stainscope {
namespace {

// Running max (dilate) or min (erode) over a 1-D window of half-width r,
// with out-of-range samples replaced by the nearest edge sample.
void sweep_line(const uint8_t* src, uint8_t* dst, int n, ptrdiff_t step, int r, bool want_max) {
  // Counts of true samples inside the current window.
  auto sample = [&](int i) { return src[std::clamp(i, 0, n - 1) * step]; };
  int trues = 0;
  for (int i = -r; i <= r; ++i) trues += sample(i);
  const int window = 2 * r + 1;
  for (int i = 0; i < n; ++i) {
    dst[i * step] = want_max ? (trues > 0) : (trues == window);
    trues += sample(i + r + 1) - sample(i - r);
  }
}

BinaryMask separable(const BinaryMask& mask, int radius, bool want_max) {
  require(radius >= 1, ErrorKind::kInvalidInput, "structuring element radius must be >= 1");
  const int w = mask.width(), h = mask.height();
  BinaryMask tmp(w, h), out(w, h);
  const uint8_t* src = mask.bits().data();
  uint8_t* mid = tmp.bits().data();
  for (int y = 0; y < h; ++y) {
    sweep_line(src + static_cast<size_t>(y) * w, mid + static_cast<size_t>(y) * w, w, 1, radius, want_max);
  }
  uint8_t* dst = out.bits().data();
  for (int x = 0; x < w; ++x) sweep_line(mid + x, dst + x, h, w, radius, want_max);
  return out;
}

}  // namespace

Image to_gray(const Image& rgb) {
  require(rgb.channels() == 3, ErrorKind::kInvalidInput, "to_gray expects a 3-channel image");
  Image gray(rgb.width(), rgb.height(), 1);
  const auto src = rgb.data();
  auto dst = gray.data();
  for (size_t i = 0; i < gray.pixel_count(); ++i) {
    const int y = 299 * src[3 * i] + 587 * src[3 * i + 1] + 114 * src[3 * i + 2];
    dst[i] = static_cast<uint8_t>((y + 500) / 1000);
  }
  return gray;
}

std::optional<int> otsu_threshold(const Image& gray) {
  require(gray.channels() == 1, ErrorKind::kInvalidInput, "otsu_threshold expects a gray image");
  std::array<double, 256> hist{};
  for (uint8_t v : gray.data()) hist[v] += 1.0;
  int occupied = 0;
  for (double c : hist) occupied += c > 0.0;
  if (occupied < 2) return std::nullopt;

  const double total = static_cast<double>(gray.pixel_count());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];
  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

TissueMask tissue_mask(const Image& img, const TissueMaskOptions& options) {
  const Image gray = to_gray(img);
  const auto threshold = otsu_threshold(gray);
  if (!threshold) {
    log::warn("tissue_mask: uniform image, Otsu threshold undefined; returning empty mask");
    return {BinaryMask(img.width(), img.height()), true};
  }
  BinaryMask raw(img.width(), img.height());
  const auto g = gray.data();
  auto bits = raw.bits();
  for (size_t i = 0; i < bits.size(); ++i) bits[i] = g[i] <= *threshold;
  BinaryMask opened = opening(raw, 1);
  return {remove_small_components(opened, static_cast<size_t>(std::max(0, options.min_area))), false};
}

BinaryMask dilate(const BinaryMask& mask, int radius) { return separable(mask, radius, true); }

BinaryMask erode(const BinaryMask& mask, int radius) { return separable(mask, radius, false); }

BinaryMask opening(const BinaryMask& mask, int radius) { return dilate(erode(mask, radius), radius); }

BinaryMask morphological_gradient(const BinaryMask& mask, int se_radius) {
  const BinaryMask d = dilate(mask, se_radius);
  const BinaryMask e = erode(mask, se_radius);
  BinaryMask out(mask.width(), mask.height());
  auto o = out.bits();
  const auto db = d.bits();
  const auto eb = e.bits();
  for (size_t i = 0; i < o.size(); ++i) o[i] = db[i] ^ eb[i];
  return out;
}

BinaryMask remove_small_components(const BinaryMask& mask, size_t min_area) {
  const int w = mask.width(), h = mask.height();
  BinaryMask out = mask;
  if (min_area <= 1) return out;
  std::vector<uint8_t> seen(mask.size(), 0);
  std::vector<int> stack, component;
  for (int start = 0; start < w * h; ++start) {
    if (!mask[start] || seen[start]) continue;
    component.clear();
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      component.push_back(p);
      const int px = p % w, py = p / w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = px + dx, ny = py + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const int q = ny * w + nx;
          if (mask[q] && !seen[q]) {
            seen[q] = 1;
            stack.push_back(q);
          }
        }
      }
    }
    if (component.size() < min_area) {
      for (int p : component) out.bits()[p] = 0;
    }
  }
  return out;
}

}  // namespace stainscope
