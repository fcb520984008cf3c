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


#include "stainscope/detector.h"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "stainscope/parallel.h"
#include "stainscope/patches.h"

namespace stainscope {

std::string_view to_string(Diagnosis diagnosis) {
  return diagnosis == Diagnosis::kPositive ? "positive" : "negative";
}

double f_brown_ratio(size_t n_orig, size_t n_rec, double epsilon) {
  return (static_cast<double>(n_orig) + epsilon) / (static_cast<double>(n_rec) + epsilon);
}

PatchScore f_brown(const Patch& original, const Image& reconstruction, const BrownBand& band,
                   double epsilon) {
  const Image& img = original.image;
  require(img.width() == reconstruction.width() && img.height() == reconstruction.height() &&
              img.channels() == reconstruction.channels(),
          ErrorKind::kInvalidInput, "reconstruction dimensions differ from the original patch");
  require(epsilon > 0.0, ErrorKind::kInvalidInput, "epsilon must be positive");
  PatchScore score;
  score.patch_id = original.id();
  score.origin = original.origin;
  score.n_orig = count_hue_band(img, band);
  score.n_rec = count_hue_band(reconstruction, band);
  score.f_brown = f_brown_ratio(score.n_orig, score.n_rec, epsilon);
  return score;
}

bool classify_patch(const PatchScore& score, double t_patch) { return score.f_brown >= t_patch; }

double slide_probability(const std::vector<PatchScore>& scores, double t_patch) {
  require(!scores.empty(), ErrorKind::kEmptySlide, "slide has no scored patches");
  size_t positive = 0;
  for (const auto& s : scores) positive += classify_patch(s, t_patch) ? 1 : 0;
  return 100.0 * static_cast<double>(positive) / static_cast<double>(scores.size());
}

double positive_percentage(const std::vector<double>& scores, double t_patch) {
  require(!scores.empty(), ErrorKind::kEmptySlide, "slide has no scored patches");
  size_t positive = 0;
  for (double s : scores) positive += s >= t_patch ? 1 : 0;
  return 100.0 * static_cast<double>(positive) / static_cast<double>(scores.size());
}

SlideScore aggregate_slide(std::string slide_id, std::vector<PatchScore> scores,
                           const Thresholds& thresholds) {
  SlideScore out;
  out.slide_id = std::move(slide_id);
  out.thresholds = thresholds;
  out.positive_fraction = slide_probability(scores, thresholds.t_patch);
  for (auto& s : scores) s.positive = classify_patch(s, thresholds.t_patch);
  out.patch_scores = std::move(scores);
  out.diagnosis =
      out.positive_fraction >= thresholds.t_slide ? Diagnosis::kPositive : Diagnosis::kNegative;
  return out;
}

BinaryMask slide_border(const Image& slide, const DetectorConfig& config, const std::string& slide_id) {
  const TissueMask tissue = tissue_mask(slide, config.tissue);
  require(!tissue.degenerate && tissue.mask.any(), ErrorKind::kEmptySlide,
          "no tissue found in slide " + slide_id);
  BinaryMask border = morphological_gradient(tissue.mask, config.se_radius);
  require(border.any(), ErrorKind::kEmptySlide, "tissue mask has no border in slide " + slide_id);
  return border;
}

std::vector<Patch> slide_border_patches(const Image& slide, const DetectorConfig& config,
                                        const std::string& slide_id) {
  return extract_border_patches(slide, slide_border(slide, config, slide_id), config.stride, slide_id);
}

std::vector<PatchScore> score_patches(const std::vector<Patch>& patches, const AeModel& model,
                                      const DetectorConfig& config) {
  std::vector<const Image*> images;
  images.reserve(patches.size());
  for (const auto& p : patches) images.push_back(&p.image);
  const std::vector<Image> recs = reconstruct_images(model, images, config.batch_size, config.jobs);
  std::vector<PatchScore> scores(patches.size());
  parallel_for(patches.size(), config.jobs, [&](size_t i) {
    scores[i] = f_brown(patches[i], recs[i], config.band, config.epsilon);
  });
  return scores;
}

SlideScore score_slide(const Image& slide, const AeModel& model, const DetectorConfig& config,
                       const Thresholds& thresholds, const std::string& slide_id) {
  const std::vector<Patch> patches = slide_border_patches(slide, config, slide_id);
  return aggregate_slide(slide_id, score_patches(patches, model, config), thresholds);
}

double baseline_red_fraction(const Patch& patch, const BrownBand& band) {
  require(patch.image.pixel_count() > 0, ErrorKind::kInvalidInput, "empty patch");
  return static_cast<double>(count_hue_band(patch.image, band)) /
         static_cast<double>(patch.image.pixel_count());
}

std::string calibration_json(const Calibration& c) {
  nlohmann::ordered_json doc;
  doc["t_patch"] = c.thresholds.t_patch;
  doc["t_slide"] = c.thresholds.t_slide;
  doc["patch_auc"] = c.patch_auc;
  doc["slide_auc"] = c.slide_auc;
  return doc.dump(2) + "\n";
}

Calibration parse_calibration(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    Calibration c;
    c.thresholds.t_patch = doc.at("t_patch").get<double>();
    c.thresholds.t_slide = doc.at("t_slide").get<double>();
    c.patch_auc = doc.value("patch_auc", 0.0);
    c.slide_auc = doc.value("slide_auc", 0.0);
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidInput, std::string("malformed thresholds file: ") + e.what());
  }
}

void save_calibration(const Calibration& calibration, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  out << calibration_json(calibration);
}

Calibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "thresholds file not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_calibration(buf.str());
}

std::string slide_score_json(const SlideScore& score) {
  nlohmann::ordered_json doc;
  doc["slide_id"] = score.slide_id;
  doc["thresholds"] = {{"t_patch", score.thresholds.t_patch}, {"t_slide", score.thresholds.t_slide}};
  doc["positive_fraction"] = score.positive_fraction;
  doc["diagnosis"] = to_string(score.diagnosis);
  nlohmann::ordered_json patches = nlohmann::ordered_json::array();
  for (const auto& p : score.patch_scores) {
    patches.push_back({{"patch_id", p.patch_id},
                       {"origin", {p.origin.x, p.origin.y}},
                       {"f_brown", p.f_brown},
                       {"n_orig", p.n_orig},
                       {"n_rec", p.n_rec},
                       {"positive", p.positive}});
  }
  doc["patches"] = std::move(patches);
  return doc.dump(2);
}

}  // namespace stainscope
