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


/// @file detector.h
/// @brief Staining-loss score, patch and slide decisions, and the red-pixel baseline.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stainscope/autoencoder.h"
#include "stainscope/color.h"
#include "stainscope/image.h"
#include "stainscope/morphology.h"

namespace stainscope {

using BrownBand = HueBand;

struct PatchScore {
  std::string patch_id;
  PixelPoint origin;
  double f_brown = 0.0;
  size_t n_orig = 0;  // brown pixels in the original
  size_t n_rec = 0;   // brown pixels in the reconstruction
  bool positive = false;
};

enum class Diagnosis { kNegative, kPositive };

std::string_view to_string(Diagnosis diagnosis);

struct Thresholds {
  double t_patch = 1.0;
  double t_slide = 50.0;  // percent
};

struct SlideScore {
  std::string slide_id;
  std::vector<PatchScore> patch_scores;
  double positive_fraction = 0.0;  // percent in [0, 100]
  Diagnosis diagnosis = Diagnosis::kNegative;
  Thresholds thresholds;
};

/// (n_orig + epsilon) / (n_rec + epsilon).
double f_brown_ratio(size_t n_orig, size_t n_rec, double epsilon = 1.0);

/// Brown-band counts on both images and their smoothed ratio.
PatchScore f_brown(const Patch& original, const Image& reconstruction, const BrownBand& band = {},
                   double epsilon = 1.0);

/// Positive when f_brown >= t_patch.
bool classify_patch(const PatchScore& score, double t_patch);

/// Percentage of patches with f_brown >= t_patch.
double slide_probability(const std::vector<PatchScore>& scores, double t_patch);

/// Percentage of raw scores >= t_patch; same rule for any patch-level detector.
double positive_percentage(const std::vector<double>& scores, double t_patch);

/// Marks each patch, computes the positive fraction and the diagnosis.
SlideScore aggregate_slide(std::string slide_id, std::vector<PatchScore> scores,
                           const Thresholds& thresholds);

struct DetectorConfig {
  BrownBand band;
  double epsilon = 1.0;
  int stride = 128;
  int se_radius = 1;
  TissueMaskOptions tissue;
  int batch_size = 8;
  int jobs = 1;
};

/// Morphological gradient of the slide's tissue mask. Throws an empty-slide
/// error when no tissue or no border is found.
BinaryMask slide_border(const Image& slide, const DetectorConfig& config, const std::string& slide_id);

/// Border windows of one slide (see slide_border).
/// Throws an empty-slide error when no tissue or no border is found.
std::vector<Patch> slide_border_patches(const Image& slide, const DetectorConfig& config,
                                        const std::string& slide_id);

/// Reconstructs every patch and scores it; order follows the input.
std::vector<PatchScore> score_patches(const std::vector<Patch>& patches, const AeModel& model,
                                      const DetectorConfig& config);

SlideScore score_slide(const Image& slide, const AeModel& model, const DetectorConfig& config,
                       const Thresholds& thresholds, const std::string& slide_id = "slide");

/// Fraction of the patch's pixels in the brown band; no autoencoder involved.
double baseline_red_fraction(const Patch& patch, const BrownBand& band = {});

/// Calibration output: thresholds and the AUCs they were chosen on.
struct Calibration {
  Thresholds thresholds;
  double patch_auc = 0.0;
  double slide_auc = 0.0;
};

std::string calibration_json(const Calibration& calibration);
Calibration parse_calibration(const std::string& text);
void save_calibration(const Calibration& calibration, const std::filesystem::path& path);
Calibration load_calibration(const std::filesystem::path& path);

/// JSON document with slide_id, thresholds, positive_fraction, diagnosis and
/// per-patch records.
std::string slide_score_json(const SlideScore& score);

}  // namespace stainscope
