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


/// @file color_norm.h
/// @brief Stain color matching: Gaussian (MVGD) transfer, HSV brightness
/// correction and per-channel histogram matching.

#pragma once

#include <optional>

#include <Eigen/Core>

#include "stainscope/image.h"

namespace stainscope {

/// RGB statistics with samples scaled to [0, 1]; population covariance.
struct ChannelStats {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

/// Stats over all pixels, or over the pixels selected by `mask`.
ChannelStats channel_stats(const Image& img, const BinaryMask* mask = nullptr);

/// Linear Monge-Kantorovich map T = Ss^-1/2 (Ss^1/2 St Ss^1/2)^1/2 Ss^-1/2,
/// with `lambda` added to both covariance diagonals.
Eigen::Matrix3d mvgd_map(const ChannelStats& src, const ChannelStats& tgt, double lambda = 1e-6);

/// T (x - mu_s) + mu_t per pixel, before clamping; row i holds pixel i.
Eigen::MatrixX3d mvgd_transfer_float(const Image& source, const ChannelStats& src,
                                     const ChannelStats& tgt, double lambda = 1e-6);

/// Float result clamped to [0, 1] and rounded to 8 bits.
Image mvgd_transfer(const Image& source, const ChannelStats& src, const ChannelStats& tgt,
                    double lambda = 1e-6);

/// Mean HSV value (max channel / 255) over the image.
double mean_value(const Image& img);

/// Scales V by target / mean V. Since V is the largest channel, scaling all
/// three channels by the same factor leaves hue and saturation unchanged;
/// values reaching 1 are clamped.
Image hsv_brightness_correction(const Image& img, double target_value_mean);

/// Same correction on HSV planes: only the value plane changes.
HsvImage hsv_brightness_correction(const HsvImage& img, double target_value_mean);

/// Per-channel CDF matching: each level maps to the smallest reference level
/// whose CDF reaches the source CDF at that level.
Image histogram_match(const Image& img, const Image& reference);

struct ColorNormOptions {
  double lambda = 1e-6;
  bool histogram = true;
  bool use_tissue_mask = true;  // stats over tissue pixels only
};

/// MVGD transfer, brightness matched to the reference's mean V, then optional
/// histogram matching.
Image color_normalize(const Image& source, const Image& reference, const ColorNormOptions& options = {});

}  // namespace stainscope
