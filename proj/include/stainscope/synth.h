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


/// @file synth.h
/// @brief Synthetic IHC-like patches and slides with known ground truth.
///
/// Tissue is a smooth bluish texture (hue from low-frequency value noise,
/// additive per-channel noise) on a near-white, slightly blue background.
/// Every tissue and background pixel keeps blue above red, so neither ever
/// falls in the brown band. Brown blobs are filled ellipses in the red hues.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stainscope/image.h"
#include "stainscope/manifest.h"

namespace stainscope {

enum class SlideClass { kNegative, kLow, kHigh };

std::string_view to_string(SlideClass c);

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct SynthSpec {
  uint64_t seed = 42;
  int n_negative = 20;
  int n_low = 15;
  int n_high = 15;
  IntRange low_blobs{1, 3};    // blobs per infected border site
  IntRange high_blobs{8, 20};
  double tissue_hue_lo = 210.0;  // degrees
  double tissue_hue_hi = 260.0;
  double blob_hue_lo = -15.0;
  double blob_hue_hi = 15.0;
  double noise_sigma = 8.0;      // 8-bit levels, tissue texture
  double blob_radius_lo = 2.0;   // ellipse semi-axes, pixels
  double blob_radius_hi = 8.0;
  int slide_size = 2048;
  int site_spacing = 256;        // arc length between candidate border sites
  double low_site_fraction = 0.25;   // share of sites carrying blobs
  double high_site_fraction = 0.75;
  int border_band = 16;          // blobs centers lie this deep or less inside the border
  int annotations_per_slide = 16;  // labeled windows written per slide (0 = all)
  int stride = 128;              // window spacing used for ground-truth labels

  void validate() const;
};

struct Blob {
  double cx = 0.0;
  double cy = 0.0;
  double a = 0.0;  // semi-axis along x
  double b = 0.0;  // semi-axis along y
};

struct InfectedPatch {
  Patch patch;
  BinaryMask blobs;  // support of all blobs
};

/// 256x256 tissue texture without brown pixels.
Patch gen_healthy_patch(uint64_t seed, const SynthSpec& spec = {});

/// Healthy texture plus `n_blobs` disjoint brown ellipses.
/// Throws a placement error when the blobs cannot be fitted.
InfectedPatch gen_infected_patch(uint64_t seed, int n_blobs, const SynthSpec& spec = {});

struct WindowLabel {
  PixelPoint origin;
  bool positive = false;  // window intersects blob support
};

struct SyntheticSlide {
  Image image;
  SlideClass slide_class = SlideClass::kNegative;
  BinaryMask tissue;          // true tissue support
  BinaryMask blob_mask;       // union of blob supports
  std::vector<Blob> blobs;
  std::vector<WindowLabel> windows;  // border windows found by the detector pipeline
};

SyntheticSlide gen_synthetic_slide(uint64_t seed, SlideClass slide_class, const SynthSpec& spec = {});

/// Slide ids in dataset order: negatives, then low, then high density.
std::vector<std::pair<std::string, SlideClass>> synth_slide_ids(const SynthSpec& spec);

/// Writes slides/, patches/, ground_truth.json and manifest.json under
/// `out_dir`; returns the manifest.
DatasetManifest gen_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir, int jobs = 1);

}  // namespace stainscope
