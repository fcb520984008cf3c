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


#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "stainscope/color.h"
#include "stainscope/color_norm.h"
#include "stainscope/error.h"
#include "stainscope/rng.h"
#include "stainscope/synth.h"

using namespace stainscope;

namespace {

// Correlated RGB noise around a base color.
Image noisy_image(int w, int h, uint64_t seed, Eigen::Vector3d base, double spread) {
  Rng rng(seed);
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a = rng.normal(), b = rng.normal();
      const Eigen::Vector3d v = base + spread * Eigen::Vector3d(a, 0.6 * a + 0.4 * b, 0.3 * b - 0.2 * a);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<uint8_t>(std::clamp(std::lround(v[c]), 0L, 255L));
    }
  }
  return img;
}

Eigen::Vector3d float_mean(const Eigen::MatrixX3d& m) { return m.colwise().mean().transpose(); }

Eigen::Matrix3d float_cov(const Eigen::MatrixX3d& m) {
  const Eigen::MatrixX3d c = m.rowwise() - m.colwise().mean();
  return (c.transpose() * c) / static_cast<double>(m.rows());
}

std::array<size_t, 256> cumulative(const Image& img, int channel) {
  std::array<size_t, 256> h{};
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) ++h[img.at(x, y, channel)];
  }
  for (int i = 1; i < 256; ++i) h[i] += h[i - 1];
  return h;
}

}  // namespace

TEST_SUITE("channel stats") {
  TEST_CASE("constant image has zero covariance") {
    const ChannelStats s = channel_stats(Image(8, 8, 3, 77));
    CHECK(s.covariance.isZero());
    CHECK(s.mean[0] == doctest::Approx(77.0 / 255.0));
  }

  TEST_CASE("black and white pixels") {
    Image img(2, 1, 3, 0);
    for (int c = 0; c < 3; ++c) img.at(1, 0, c) = 255;
    const ChannelStats s = channel_stats(img);
    for (int i = 0; i < 3; ++i) {
      CHECK(s.mean[i] == doctest::Approx(0.5));
      for (int j = 0; j < 3; ++j) CHECK(s.covariance(i, j) == doctest::Approx(0.25));
    }
  }

  TEST_CASE("a mask restricts to its region") {
    const Image img = noisy_image(40, 30, 1, {120, 90, 160}, 25);
    BinaryMask mask(40, 30);
    for (int y = 5; y < 20; ++y) {
      for (int x = 10; x < 30; ++x) mask.set(x, y);
    }
    const ChannelStats a = channel_stats(img, &mask);
    const ChannelStats b = channel_stats(img.crop(10, 5, 20, 15));
    CHECK((a.mean - b.mean).norm() < 1e-12);
    CHECK((a.covariance - b.covariance).norm() < 1e-12);
  }

  TEST_CASE("fewer than two pixels") {
    CHECK_THROWS_AS(channel_stats(Image(1, 1, 3)), Error);
    BinaryMask one(4, 4);
    one.set(1, 1);
    CHECK_THROWS_AS(channel_stats(Image(4, 4, 3), &one), Error);
  }
}

TEST_SUITE("mvgd") {
  TEST_CASE("identical statistics give the identity") {
    const Image img = noisy_image(64, 48, 2, {150, 100, 180}, 20);
    const ChannelStats s = channel_stats(img);
    const Image out = mvgd_transfer(img, s, s);
    int worst = 0;
    for (size_t i = 0; i < img.data().size(); ++i) worst = std::max(worst, std::abs(img.data()[i] - out.data()[i]));
    CHECK(worst <= 1);
  }

  TEST_CASE("float output carries the target moments") {
    const Image src = noisy_image(80, 60, 3, {150, 100, 180}, 20);
    const Image tgt = noisy_image(70, 50, 4, {110, 140, 120}, 15);
    const ChannelStats ss = channel_stats(src), ts = channel_stats(tgt);
    const Eigen::MatrixX3d f = mvgd_transfer_float(src, ss, ts, 0.0);
    CHECK((float_mean(f) - ts.mean).cwiseAbs().maxCoeff() < 1e-6);
    const Eigen::Matrix3d cov = float_cov(f);
    CHECK((cov - ts.covariance).norm() / ts.covariance.norm() < 1e-3);
  }

  TEST_CASE("rank-deficient grayscale source stays finite") {
    Image gray(32, 32, 3);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        for (int c = 0; c < 3; ++c) gray.at(x, y, c) = static_cast<uint8_t>(x * 8);
      }
    }
    const ChannelStats tgt = channel_stats(noisy_image(32, 32, 5, {120, 80, 160}, 20));
    const Eigen::MatrixX3d f = mvgd_transfer_float(gray, channel_stats(gray), tgt);
    CHECK(f.allFinite());
    CHECK_NOTHROW(mvgd_transfer(gray, channel_stats(gray), tgt));
  }

  TEST_CASE("the map is symmetric positive definite") {
    for (uint64_t seed = 10; seed < 15; ++seed) {
      const ChannelStats a = channel_stats(noisy_image(30, 30, seed, {130, 110, 170}, 18));
      const ChannelStats b = channel_stats(noisy_image(30, 30, seed + 100, {100, 150, 120}, 12));
      const Eigen::Matrix3d t = mvgd_map(a, b);
      CHECK((t - t.transpose()).norm() < 1e-9 * t.norm());
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
      // T Ss T = St.
      const Eigen::Matrix3d ss = a.covariance + 1e-6 * Eigen::Matrix3d::Identity();
      const Eigen::Matrix3d st = b.covariance + 1e-6 * Eigen::Matrix3d::Identity();
      CHECK((t * ss * t - st).norm() < 1e-9);
    }
  }

  TEST_CASE("a negative definite covariance is a numeric error") {
    ChannelStats bad;
    bad.covariance = -Eigen::Matrix3d::Identity();
    try {
      mvgd_map(bad, bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNumeric);
    }
  }
}

TEST_SUITE("brightness") {
  TEST_CASE("current mean as target leaves the image alone") {
    const Image img = noisy_image(40, 40, 6, {140, 100, 170}, 20);
    const Image out = hsv_brightness_correction(img, mean_value(img));
    int worst = 0;
    for (size_t i = 0; i < img.data().size(); ++i) worst = std::max(worst, std::abs(img.data()[i] - out.data()[i]));
    CHECK(worst <= 1);
  }

  TEST_CASE("a dim image is doubled exactly") {
    const Image img = noisy_image(40, 40, 7, {70, 50, 90}, 10);
    int vmax = 0;
    for (uint8_t v : img.data()) vmax = std::max<int>(vmax, v);
    REQUIRE(vmax <= 127);
    const Image out = hsv_brightness_correction(img, 2.0 * mean_value(img));
    for (size_t i = 0; i < img.data().size(); ++i) CHECK(out.data()[i] == 2 * img.data()[i]);
    const HsvImage a = rgb_to_hsv(img), b = rgb_to_hsv(out);
    for (size_t i = 0; i < a.pixel_count(); ++i) {
      CHECK(b.value[i] == doctest::Approx(2 * a.value[i]));
      CHECK(b.hue[i] == doctest::Approx(a.hue[i]).epsilon(1e-5));
      CHECK(b.saturation[i] == doctest::Approx(a.saturation[i]).epsilon(1e-5));
    }
  }

  TEST_CASE("hsv planes keep hue and saturation") {
    const HsvImage in = rgb_to_hsv(noisy_image(30, 30, 8, {160, 120, 90}, 30));
    const HsvImage out = hsv_brightness_correction(in, 0.9);
    CHECK(out.hue == in.hue);
    CHECK(out.saturation == in.saturation);
    for (float v : out.value) CHECK(v <= 1.0f);
  }

  TEST_CASE("an all-black image cannot be corrected") {
    CHECK_THROWS_AS(hsv_brightness_correction(Image(4, 4, 3, 0), 0.5), Error);
  }
}

TEST_SUITE("histogram match") {
  TEST_CASE("matching to itself is the identity") {
    const Image img = noisy_image(50, 40, 9, {130, 90, 170}, 40);
    CHECK(histogram_match(img, img) == img);
  }

  TEST_CASE("output cdf tracks the reference") {
    // A source with every level present.
    Image src(256, 64, 3);
    Rng rng(10);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 256; ++x) {
        for (int c = 0; c < 3; ++c) src.at(x, y, c) = static_cast<uint8_t>(y < 4 ? x : rng.uniform_int(0, 255));
      }
    }
    const Image ref = noisy_image(256, 64, 11, {120, 100, 150}, 35);
    const Image out = histogram_match(src, ref);
    for (int c = 0; c < 3; ++c) {
      const auto cs = cumulative(src, c), cr = cumulative(ref, c), co = cumulative(out, c);
      size_t biggest = cs[0];
      for (int i = 1; i < 256; ++i) biggest = std::max(biggest, cs[i] - cs[i - 1]);
      for (int l = 0; l < 256; ++l) {
        // Never ahead of the reference, and behind by at most one source level's mass.
        CHECK(co[l] <= cr[l]);
        CHECK(cr[l] - co[l] <= biggest);
      }
    }
  }

  TEST_CASE("monotone and idempotent") {
    const Image src = noisy_image(60, 60, 12, {140, 120, 160}, 30);
    const Image ref = noisy_image(60, 60, 13, {90, 150, 110}, 25);
    const Image once = histogram_match(src, ref);
    CHECK(histogram_match(once, ref) == once);
    for (size_t i = 0; i < 500; ++i) {
      for (size_t j = i + 1; j < i + 40; ++j) {
        for (int c = 0; c < 3; ++c) {
          if (src.data()[i * 3 + c] < src.data()[j * 3 + c]) CHECK(once.data()[i * 3 + c] <= once.data()[j * 3 + c]);
        }
      }
    }
  }
}

TEST_SUITE("color normalize") {
  TEST_CASE("pipeline moves a tinted patch toward the reference") {
    const Image ref = gen_healthy_patch(1).image;
    Image src = gen_healthy_patch(2).image;
    for (int y = 0; y < src.height(); ++y) {
      for (int x = 0; x < src.width(); ++x) src.at(x, y, 1) = static_cast<uint8_t>(src.at(x, y, 1) * 0.7);
    }
    ColorNormOptions opt;
    opt.histogram = false;
    const Image out = color_normalize(src, ref, opt);
    const ChannelStats r = channel_stats(ref), s = channel_stats(src), o = channel_stats(out);
    CHECK((o.mean - r.mean).norm() < (s.mean - r.mean).norm());
    CHECK(std::abs(mean_value(out) - mean_value(ref)) < 0.02);
  }
}
