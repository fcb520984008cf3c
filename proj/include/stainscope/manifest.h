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


/// @file manifest.h
/// @brief Dataset manifest: slides, diagnoses, splits and annotated windows.
///
/// A single JSON document. Relative paths resolve against the manifest's
/// directory.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stainscope/image.h"

namespace stainscope {

enum class SlideDiagnosis { kNegative, kPositive, kUnknown };
enum class Split { kTrain, kTest, kUnassigned };
enum class PatchLabel { kNegative, kPositive, kUnlabeled };

std::string_view to_string(SlideDiagnosis d);
std::string_view to_string(Split s);
std::string_view to_string(PatchLabel l);

struct ManifestPatch {
  std::string patch_path;
  PixelPoint origin;
  PatchLabel label = PatchLabel::kUnlabeled;
  bool operator==(const ManifestPatch&) const = default;
};

struct ManifestSlide {
  std::string slide_id;
  std::string image_path;
  SlideDiagnosis diagnosis = SlideDiagnosis::kUnknown;
  Split split = Split::kUnassigned;
  std::vector<ManifestPatch> patches;
  bool operator==(const ManifestSlide&) const = default;
};

struct DatasetManifest {
  int version = 1;
  std::vector<ManifestSlide> slides;
  std::filesystem::path base_dir;  // not serialized

  std::filesystem::path resolve(const std::string& path) const;
};

std::string manifest_json(const DatasetManifest& manifest);
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);

/// Rejects duplicate slide ids; with `check_files`, also missing slide images
/// and missing labeled patch files.
void validate_manifest(const DatasetManifest& manifest, bool check_files = true);

DatasetManifest load_manifest(const std::filesystem::path& path, bool check_files = true);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace stainscope
