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


// Independent reference implementations used by unit and acceptance tests.
// They share no code with the library beyond the container types.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "stainscope/image.h"

namespace stainscope::oracle {

/// Brown-band membership for [-20, 20] in exact integer arithmetic: hue is
/// 60 (g - b) / d when red is the (first) maximum, so |hue| <= 20 iff
/// 3 |g - b| <= d. Achromatic pixels have hue 0.
inline bool brown_pixel(int r, int g, int b) {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int d = mx - mn;
  if (d == 0) return true;
  if (mx != r) return false;
  return 3 * std::abs(g - b) <= d;
}

inline size_t brown_count(const Image& img) {
  size_t n = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      n += brown_pixel(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)) ? 1 : 0;
    }
  }
  return n;
}

/// True where the (2r+1)^2 neighborhood, with replicated edges, is not constant.
inline BinaryMask gradient(const BinaryMask& m, int r) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool any = false;
      bool all = true;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = std::clamp(x + dx, 0, m.width() - 1);
          const int yy = std::clamp(y + dy, 0, m.height() - 1);
          const bool v = m.get(xx, yy);
          any = any || v;
          all = all && v;
        }
      }
      out.set(x, y, any && !all);
    }
  }
  return out;
}

/// Tie-adjusted Mann-Whitney AUC over all positive-negative pairs.
inline double mann_whitney(const std::vector<double>& scores, const std::vector<bool>& labels) {
  uint64_t twice = 0;
  uint64_t pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        twice += 2;
      } else if (scores[i] == scores[j]) {
        twice += 1;
      }
    }
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pairs));
}

}  // namespace stainscope::oracle
