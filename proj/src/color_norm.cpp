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


#include "stainscope/color_norm.h"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "stainscope/error.h"
#include "stainscope/morphology.h"

namespace stainscope {
namespace {

void require_rgb(const Image& img, const char* what) {
  require(img.channels() == 3 && img.pixel_count() > 0, ErrorKind::kInvalidInput,
          std::string(what) + " must be a non-empty RGB image");
}

/// Symmetric square root and inverse square root by eigendecomposition.
struct SqrtPair {
  Eigen::Matrix3d root;
  Eigen::Matrix3d inv_root;
};

SqrtPair sym_sqrt(const Eigen::Matrix3d& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  require(es.info() == Eigen::Success, ErrorKind::kNumeric,
          std::string("eigendecomposition failed for ") + what);
  const Eigen::Vector3d ev = es.eigenvalues();
  require(ev.minCoeff() > 0.0 && ev.allFinite(), ErrorKind::kNumeric,
          std::string(what) + " is not positive definite after regularization");
  const Eigen::Matrix3d& V = es.eigenvectors();
  return {V * ev.cwiseSqrt().asDiagonal() * V.transpose(),
          V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose()};
}

}  // namespace

ChannelStats channel_stats(const Image& img, const BinaryMask* mask) {
  require_rgb(img, "image");
  if (mask != nullptr) {
    require(mask->width() == img.width() && mask->height() == img.height(),
            ErrorKind::kInvalidInput, "mask dimensions differ from image");
  }
  const auto px = img.data();
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  size_t n = 0;
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    if (mask != nullptr && !(*mask)[i]) continue;
    sum += Eigen::Vector3d(px[3 * i], px[3 * i + 1], px[3 * i + 2]) / 255.0;
    ++n;
  }
  require(n >= 2, ErrorKind::kInvalidInput, "channel statistics need at least 2 pixels");
  ChannelStats s;
  s.mean = sum / static_cast<double>(n);
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    if (mask != nullptr && !(*mask)[i]) continue;
    const Eigen::Vector3d d = Eigen::Vector3d(px[3 * i], px[3 * i + 1], px[3 * i + 2]) / 255.0 - s.mean;
    s.covariance += d * d.transpose();
  }
  s.covariance /= static_cast<double>(n);
  return s;
}

Eigen::Matrix3d mvgd_map(const ChannelStats& src, const ChannelStats& tgt, double lambda) {
  require(lambda >= 0.0, ErrorKind::kInvalidInput, "lambda must be non-negative");
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d cs = src.covariance + lambda * I;
  const Eigen::Matrix3d ct = tgt.covariance + lambda * I;
  const SqrtPair s = sym_sqrt(cs, "source covariance");
  Eigen::Matrix3d inner = s.root * ct * s.root;
  inner = (inner + inner.transpose()) / 2.0;
  const SqrtPair m = sym_sqrt(inner, "transfer middle term");
  Eigen::Matrix3d t = s.inv_root * m.root * s.inv_root;
  return (t + t.transpose()) / 2.0;
}

Eigen::MatrixX3d mvgd_transfer_float(const Image& source, const ChannelStats& src,
                                     const ChannelStats& tgt, double lambda) {
  require_rgb(source, "source");
  const Eigen::Matrix3d t = mvgd_map(src, tgt, lambda);
  const auto px = source.data();
  Eigen::MatrixX3d out(static_cast<Eigen::Index>(source.pixel_count()), 3);
  for (size_t i = 0; i < source.pixel_count(); ++i) {
    const Eigen::Vector3d x = Eigen::Vector3d(px[3 * i], px[3 * i + 1], px[3 * i + 2]) / 255.0;
    out.row(static_cast<Eigen::Index>(i)) = (t * (x - src.mean) + tgt.mean).transpose();
  }
  require(out.allFinite(), ErrorKind::kNumeric, "color transfer produced non-finite values");
  return out;
}

Image mvgd_transfer(const Image& source, const ChannelStats& src, const ChannelStats& tgt,
                    double lambda) {
  const Eigen::MatrixX3d f = mvgd_transfer_float(source, src, tgt, lambda);
  Image out(source.width(), source.height(), 3);
  auto px = out.data();
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      px[static_cast<size_t>(3 * i + c)] =
          static_cast<uint8_t>(std::lround(std::clamp(f(i, c), 0.0, 1.0) * 255.0));
    }
  }
  return out;
}

double mean_value(const Image& img) {
  require_rgb(img, "image");
  const auto px = img.data();
  uint64_t sum = 0;
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    sum += std::max({px[3 * i], px[3 * i + 1], px[3 * i + 2]});
  }
  return static_cast<double>(sum) / (255.0 * static_cast<double>(img.pixel_count()));
}

Image hsv_brightness_correction(const Image& img, double target_value_mean) {
  require(target_value_mean > 0.0 && target_value_mean <= 1.0, ErrorKind::kInvalidInput,
          "target value mean must lie in (0, 1]");
  const double current = mean_value(img);
  require(current > 0.0, ErrorKind::kInvalidInput, "image is black; brightness undefined");
  const double factor = target_value_mean / current;
  Image out = img;
  auto px = out.data();
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    const uint8_t v = std::max({px[3 * i], px[3 * i + 1], px[3 * i + 2]});
    if (v == 0) continue;
    // Clamp by shrinking the factor, not the channels, so the color is kept.
    const double f = std::min(factor, 255.0 / v);
    for (int c = 0; c < 3; ++c) {
      px[3 * i + c] = static_cast<uint8_t>(std::min(255L, std::lround(px[3 * i + c] * f)));
    }
  }
  return out;
}

HsvImage hsv_brightness_correction(const HsvImage& img, double target_value_mean) {
  require(target_value_mean > 0.0 && target_value_mean <= 1.0, ErrorKind::kInvalidInput,
          "target value mean must lie in (0, 1]");
  require(img.pixel_count() > 0, ErrorKind::kInvalidInput, "empty image");
  double sum = 0.0;
  for (float v : img.value) sum += v;
  const double current = sum / static_cast<double>(img.pixel_count());
  require(current > 0.0, ErrorKind::kInvalidInput, "image is black; brightness undefined");
  const double factor = target_value_mean / current;
  HsvImage out = img;
  for (float& v : out.value) v = static_cast<float>(std::min(1.0, v * factor));
  return out;
}

Image histogram_match(const Image& img, const Image& reference) {
  require_rgb(img, "image");
  require_rgb(reference, "reference");
  const uint64_t ns = img.pixel_count();
  const uint64_t nr = reference.pixel_count();
  Image out = img;
  for (int c = 0; c < 3; ++c) {
    std::array<uint64_t, 256> cs{};
    std::array<uint64_t, 256> cr{};
    for (size_t i = 0; i < ns; ++i) ++cs[img.data()[3 * i + c]];
    for (size_t i = 0; i < nr; ++i) ++cr[reference.data()[3 * i + c]];
    for (int l = 1; l < 256; ++l) {
      cs[l] += cs[l - 1];
      cr[l] += cr[l - 1];
    }
    std::array<uint8_t, 256> lut{};
    int r = 0;
    for (int l = 0; l < 256; ++l) {
      // cdf_ref[r] >= cdf_src[l], compared exactly as cross products.
      while (r < 255 && cr[r] * ns < cs[l] * nr) ++r;
      lut[l] = static_cast<uint8_t>(r);
    }
    auto px = out.data();
    for (size_t i = 0; i < ns; ++i) px[3 * i + c] = lut[px[3 * i + c]];
  }
  return out;
}

Image color_normalize(const Image& source, const Image& reference, const ColorNormOptions& options) {
  auto stats = [&](const Image& img) {
    if (options.use_tissue_mask) {
      const TissueMask tm = tissue_mask(img);
      if (!tm.degenerate && tm.mask.count() >= 2) return channel_stats(img, &tm.mask);
    }
    return channel_stats(img);
  };
  Image out = mvgd_transfer(source, stats(source), stats(reference), options.lambda);
  const double target_v = mean_value(reference);
  if (target_v > 0.0 && mean_value(out) > 0.0) out = hsv_brightness_correction(out, target_v);
  if (options.histogram) out = histogram_match(out, reference);
  return out;
}

}  // namespace stainscope
