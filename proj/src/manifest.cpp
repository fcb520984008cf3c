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


#include "stainscope/manifest.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "stainscope/error.h"

namespace stainscope {
namespace {

using nlohmann::ordered_json;

template <typename E, size_t N>
E parse_enum(const std::string& text, const std::pair<E, const char*> (&table)[N], const char* what) {
  for (const auto& [value, name] : table) {
    if (text == name) return value;
  }
  fail(ErrorKind::kInvalidInput, std::string("unknown ") + what + " '" + text + "'");
}

constexpr std::pair<SlideDiagnosis, const char*> kDiagnoses[] = {
    {SlideDiagnosis::kNegative, "negative"},
    {SlideDiagnosis::kPositive, "positive"},
    {SlideDiagnosis::kUnknown, "unknown"}};
constexpr std::pair<Split, const char*> kSplits[] = {
    {Split::kTrain, "train"}, {Split::kTest, "test"}, {Split::kUnassigned, "unassigned"}};
constexpr std::pair<PatchLabel, const char*> kLabels[] = {
    {PatchLabel::kNegative, "negative"},
    {PatchLabel::kPositive, "positive"},
    {PatchLabel::kUnlabeled, "unlabeled"}};

}  // namespace

std::string_view to_string(SlideDiagnosis d) { return kDiagnoses[static_cast<int>(d)].second; }
std::string_view to_string(Split s) { return kSplits[static_cast<int>(s)].second; }
std::string_view to_string(PatchLabel l) { return kLabels[static_cast<int>(l)].second; }

std::filesystem::path DatasetManifest::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

std::string manifest_json(const DatasetManifest& manifest) {
  ordered_json doc;
  doc["version"] = manifest.version;
  ordered_json slides = ordered_json::array();
  for (const auto& s : manifest.slides) {
    ordered_json patches = ordered_json::array();
    for (const auto& p : s.patches) {
      patches.push_back({{"patch_path", p.patch_path},
                         {"origin", {p.origin.x, p.origin.y}},
                         {"label", to_string(p.label)}});
    }
    slides.push_back({{"slide_id", s.slide_id},
                      {"image_path", s.image_path},
                      {"diagnosis", to_string(s.diagnosis)},
                      {"split", to_string(s.split)},
                      {"patches", std::move(patches)}});
  }
  doc["slides"] = std::move(slides);
  return doc.dump(2) + "\n";
}

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  try {
    const auto doc = nlohmann::json::parse(text);
    m.version = doc.at("version").get<int>();
    require(m.version == 1, ErrorKind::kInvalidInput,
            "unsupported manifest version " + std::to_string(m.version));
    for (const auto& js : doc.at("slides")) {
      ManifestSlide s;
      s.slide_id = js.at("slide_id").get<std::string>();
      s.image_path = js.at("image_path").get<std::string>();
      s.diagnosis = parse_enum(js.value("diagnosis", "unknown"), kDiagnoses, "diagnosis");
      s.split = parse_enum(js.value("split", "unassigned"), kSplits, "split");
      if (js.contains("patches")) {
        for (const auto& jp : js.at("patches")) {
          ManifestPatch p;
          p.patch_path = jp.value("patch_path", "");
          const auto& o = jp.at("origin");
          p.origin = {o.at(0).get<int>(), o.at(1).get<int>()};
          p.label = parse_enum(jp.value("label", "unlabeled"), kLabels, "patch label");
          s.patches.push_back(std::move(p));
        }
      }
      m.slides.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidInput, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void validate_manifest(const DatasetManifest& manifest, bool check_files) {
  std::set<std::string> ids;
  for (const auto& s : manifest.slides) {
    require(!s.slide_id.empty(), ErrorKind::kInvalidInput, "manifest slide with empty slide_id");
    require(ids.insert(s.slide_id).second, ErrorKind::kInvalidInput,
            "duplicate slide_id '" + s.slide_id + "' in manifest");
    if (!check_files) continue;
    require(std::filesystem::exists(manifest.resolve(s.image_path)), ErrorKind::kIo,
            "slide image not found: " + manifest.resolve(s.image_path).string());
    for (const auto& p : s.patches) {
      if (p.label == PatchLabel::kUnlabeled) continue;
      require(!p.patch_path.empty() && std::filesystem::exists(manifest.resolve(p.patch_path)),
              ErrorKind::kIo, "labeled patch file not found: " + manifest.resolve(p.patch_path).string());
    }
  }
}

DatasetManifest load_manifest(const std::filesystem::path& path, bool check_files) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  DatasetManifest m = parse_manifest(buf.str(), path.parent_path());
  validate_manifest(m, check_files);
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write manifest " + path.string());
  out << manifest_json(manifest);
  require(static_cast<bool>(out), ErrorKind::kIo, "failed writing manifest " + path.string());
}

}  // namespace stainscope
