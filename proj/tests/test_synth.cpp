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


#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.h"
#include "stainscope/color.h"
#include "stainscope/detector.h"
#include "stainscope/image_io.h"
#include "stainscope/synth.h"
#include "test_util.h"

using namespace stainscope;
using stainscope::testing::kind_of;
using stainscope::testing::TempDir;

namespace {

// Pixel-center ellipse rasterization, written independently of the generator.
std::vector<std::pair<int, int>> ellipse_pixels(double cx, double cy, double a, double b, int w, int h) {
  std::vector<std::pair<int, int>> px;
  for (int y = std::max(0, static_cast<int>(cy - b) - 1); y <= std::min(h - 1, static_cast<int>(cy + b) + 1); ++y) {
    for (int x = std::max(0, static_cast<int>(cx - a) - 1); x <= std::min(w - 1, static_cast<int>(cx + a) + 1); ++x) {
      const double u = (x - cx) / a, v = (y - cy) / b;
      if (u * u + v * v <= 1.0) px.emplace_back(x, y);
    }
  }
  return px;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double circular_mean_hue(const Image& img) {
  const HsvImage hsv = rgb_to_hsv(img);
  double s = 0.0, c = 0.0;
  for (float h : hsv.hue) {
    s += std::sin(h * M_PI / 180.0);
    c += std::cos(h * M_PI / 180.0);
  }
  double deg = std::atan2(s, c) * 180.0 / M_PI;
  return deg < 0 ? deg + 360.0 : deg;
}

SynthSpec small_spec() {
  SynthSpec spec;
  spec.n_negative = 2;
  spec.n_low = 1;
  spec.n_high = 1;
  spec.slide_size = 1024;
  spec.annotations_per_slide = 6;
  return spec;
}

}  // namespace

TEST_SUITE("synthetic patches") {
  TEST_CASE("healthy patches carry no brown") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
      const Patch p = gen_healthy_patch(seed);
      CHECK(count_hue_band(p.image, HueBand{}) == 0);
      CHECK(oracle::brown_count(p.image) == 0);
    }
  }

  TEST_CASE("same seed, same patch") {
    CHECK(gen_healthy_patch(5).image == gen_healthy_patch(5).image);
    CHECK_FALSE(gen_healthy_patch(5).image == gen_healthy_patch(6).image);
  }

  TEST_CASE("mean hue lies in the tissue range") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      const double h = circular_mean_hue(gen_healthy_patch(seed).image);
      CHECK(h >= 210.0);
      CHECK(h <= 260.0);
    }
  }

  TEST_CASE("blob pixels are brown") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      const InfectedPatch ip = gen_infected_patch(seed, 1 + static_cast<int>(seed % 12));
      CHECK(static_cast<double>(oracle::brown_count(ip.patch.image)) >= 0.8 * static_cast<double>(ip.blobs.count()));
    }
  }

  TEST_CASE("one small blob stays under the area bound") {
    SynthSpec spec;
    spec.blob_radius_lo = 2.0;
    spec.blob_radius_hi = 8.0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
      const InfectedPatch ip = gen_infected_patch(seed, 1, spec);
      CHECK(oracle::brown_count(ip.patch.image) <= 201);  // pi * 8 * 8 plus lattice slack
    }
    spec.blob_radius_lo = spec.blob_radius_hi = 2.0;
    for (uint64_t seed = 0; seed < 5; ++seed) CHECK(gen_infected_patch(seed, 1, spec).blobs.count() <= 200);
  }

  TEST_CASE("more blobs add disjoint support") {
    // Blob k is placed by the same draws whatever the total, so masks nest.
    const InfectedPatch a = gen_infected_patch(9, 4);
    const InfectedPatch b = gen_infected_patch(9, 5);
    size_t shared = 0;
    for (size_t i = 0; i < a.blobs.size(); ++i) shared += a.blobs[i] && b.blobs[i];
    CHECK(shared == a.blobs.count());
    CHECK(b.blobs.count() > a.blobs.count());
  }

  TEST_CASE("impossible placement and bad counts") {
    SynthSpec spec;
    spec.blob_radius_lo = spec.blob_radius_hi = 60.0;
    CHECK(kind_of([&] { gen_infected_patch(1, 40, spec); }) == ErrorKind::kPlacement);
    CHECK(kind_of([] { gen_infected_patch(1, 0); }) == ErrorKind::kInvalidInput);
  }
}

TEST_SUITE("synthetic slides") {
  TEST_CASE("negative slides have no blobs") {
    const SyntheticSlide s = gen_synthetic_slide(3, SlideClass::kNegative);
    CHECK(s.blobs.empty());
    CHECK(s.blob_mask.count() == 0);
    CHECK(oracle::brown_count(s.image) == 0);
    for (const WindowLabel& w : s.windows) CHECK_FALSE(w.positive);
  }

  TEST_CASE("same seed, same slide") {
    SynthSpec spec;
    spec.slide_size = 1024;
    const SyntheticSlide a = gen_synthetic_slide(11, SlideClass::kLow, spec);
    const SyntheticSlide b = gen_synthetic_slide(11, SlideClass::kLow, spec);
    CHECK(a.image == b.image);
    CHECK(a.blob_mask == b.blob_mask);
  }

  TEST_CASE("blob supports are disjoint and match the mask") {
    const SyntheticSlide s = gen_synthetic_slide(21, SlideClass::kHigh);
    REQUIRE(!s.blobs.empty());
    BinaryMask rebuilt(s.image.width(), s.image.height());
    size_t total = 0;
    for (const Blob& b : s.blobs) {
      for (auto [x, y] : ellipse_pixels(b.cx, b.cy, b.a, b.b, s.image.width(), s.image.height())) {
        CHECK_FALSE(rebuilt.get(x, y));
        rebuilt.set(x, y);
        CHECK(s.tissue.get(x, y));
        ++total;
      }
    }
    CHECK(rebuilt == s.blob_mask);
    CHECK(total == s.blob_mask.count());
  }

  TEST_CASE("detected borders pass near the blobs") {
    size_t near = 0, all = 0;
    for (uint64_t seed = 30; seed < 33; ++seed) {
      const SyntheticSlide s = gen_synthetic_slide(seed, seed % 2 ? SlideClass::kHigh : SlideClass::kLow);
      const BinaryMask border = slide_border(s.image, DetectorConfig{}, "s");
      for (const Blob& b : s.blobs) {
        ++all;
        bool hit = false;
        const int cx = static_cast<int>(std::lround(b.cx)), cy = static_cast<int>(std::lround(b.cy));
        for (int dy = -16; dy <= 16 && !hit; ++dy) {
          for (int dx = -16; dx <= 16 && !hit; ++dx) {
            const int x = cx + dx, y = cy + dy;
            if (dx * dx + dy * dy > 256 || x < 0 || y < 0 || x >= border.width() || y >= border.height()) continue;
            hit = border.get(x, y);
          }
        }
        near += hit ? 1 : 0;
      }
    }
    REQUIRE(all > 0);
    MESSAGE(near << " of " << all << " blob centers near a detected border");
    CHECK(static_cast<double>(near) >= 0.9 * static_cast<double>(all));
  }
}

TEST_SUITE("synthetic datasets") {
  TEST_CASE("negative-only spec") {
    TempDir dir("synth_neg");
    SynthSpec spec = small_spec();
    spec.n_negative = 3;
    spec.n_low = spec.n_high = 0;
    const DatasetManifest m = gen_dataset(spec, dir.path());
    REQUIRE(m.slides.size() == 3);
    for (const ManifestSlide& s : m.slides) CHECK(s.diagnosis == SlideDiagnosis::kNegative);
  }

  TEST_CASE("manifest labels agree with the blob ground truth") {
    TempDir dir("synth_small");
    const SynthSpec spec = small_spec();
    const DatasetManifest m = gen_dataset(spec, dir.path(), 2);
    REQUIRE(m.slides.size() == 4);
    const auto truth = nlohmann::json::parse(slurp(dir / "ground_truth.json"));
    const DatasetManifest loaded = load_manifest(dir / "manifest.json");
    CHECK(loaded.slides == m.slides);
    size_t positives = 0;
    for (size_t i = 0; i < m.slides.size(); ++i) {
      const ManifestSlide& ms = m.slides[i];
      CHECK(truth["slides"][i]["slide_id"] == ms.slide_id);
      BinaryMask blobs(spec.slide_size, spec.slide_size);
      for (const auto& b : truth["slides"][i]["blobs"]) {
        for (auto [x, y] : ellipse_pixels(b[0], b[1], b[2], b[3], spec.slide_size, spec.slide_size)) blobs.set(x, y);
      }
      CHECK((ms.diagnosis == SlideDiagnosis::kPositive) == (blobs.count() > 0));
      const Image slide = read_image(dir / ms.image_path);
      CHECK(ms.patches.size() <= static_cast<size_t>(spec.annotations_per_slide));
      for (const ManifestPatch& mp : ms.patches) {
        bool hit = false;
        for (int y = mp.origin.y; y < mp.origin.y + kPatchSize && !hit; ++y) {
          for (int x = mp.origin.x; x < mp.origin.x + kPatchSize && !hit; ++x) hit = blobs.get(x, y);
        }
        CHECK((mp.label == PatchLabel::kPositive) == hit);
        positives += hit ? 1 : 0;
        CHECK(read_image(dir / mp.patch_path) == slide.crop(mp.origin.x, mp.origin.y, kPatchSize, kPatchSize));
      }
    }
    CHECK(positives > 0);
  }

  TEST_CASE("regeneration is byte-identical across worker counts") {
    TempDir a("synth_a"), b("synth_b");
    SynthSpec spec = small_spec();
    spec.n_negative = 1;
    gen_dataset(spec, a.path(), 1);
    gen_dataset(spec, b.path(), 3);
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
    CHECK(slurp(a / "ground_truth.json") == slurp(b / "ground_truth.json"));
    CHECK(slurp(a / "slides/high_000.png") == slurp(b / "slides/high_000.png"));
  }

  TEST_CASE("default counts give fifty slide ids") {
    const auto ids = synth_slide_ids(SynthSpec{});
    REQUIRE(ids.size() == 50);
    CHECK(ids.front().first == "neg_000");
    CHECK(ids.back().first == "high_014");
  }

  TEST_CASE("invalid specs are config errors") {
    SynthSpec spec;
    spec.low_blobs = {0, 3};
    CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::kConfig);
  }
}
