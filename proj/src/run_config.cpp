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


#include "stainscope/run_config.h"

#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace stainscope {
namespace {

using nlohmann::json;

struct Entry {
  ConfigKey key;
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

template <typename T, typename Field>
Entry field(std::string name, std::string doc, Field field_of) {
  return Entry{
      {std::move(name), std::move(doc)},
      [field_of](RunConfig& c, const json& v) { field_of(c) = v.get<T>(); },
      [field_of](const RunConfig& c) { return json(field_of(const_cast<RunConfig&>(c))); }};
}

#define STAINSCOPE_KEY(type, name, doc, expr) \
  field<type>(name, doc, [](RunConfig& c) -> type& { return expr; })

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      STAINSCOPE_KEY(double, "band.lo", "brown hue band lower bound, degrees", c.detector.band.lo),
      STAINSCOPE_KEY(double, "band.hi", "brown hue band upper bound, degrees", c.detector.band.hi),
      STAINSCOPE_KEY(double, "band.sat_min", "minimum saturation for a brown pixel", c.detector.band.sat_min),
      STAINSCOPE_KEY(double, "band.val_min", "minimum value for a brown pixel", c.detector.band.val_min),
      STAINSCOPE_KEY(double, "epsilon", "additive smoothing of the F_brown ratio", c.detector.epsilon),
      STAINSCOPE_KEY(int, "stride", "minimum spacing of border windows, pixels", c.detector.stride),
      STAINSCOPE_KEY(int, "se_radius", "morphological gradient radius", c.detector.se_radius),
      STAINSCOPE_KEY(int, "min_area", "smallest tissue component kept, pixels", c.detector.tissue.min_area),
      STAINSCOPE_KEY(int, "score_batch", "windows per reconstruction batch", c.detector.batch_size),
      STAINSCOPE_KEY(int, "crops_per_slide", "random border crops per healthy training slide", c.crops_per_slide),
      STAINSCOPE_KEY(int, "train.batch_size", "training minibatch size", c.train.batch_size),
      STAINSCOPE_KEY(double, "train.learning_rate", "Adam learning rate", c.train.learning_rate),
      STAINSCOPE_KEY(double, "train.beta1", "Adam first-moment decay", c.train.beta1),
      STAINSCOPE_KEY(double, "train.beta2", "Adam second-moment decay", c.train.beta2),
      STAINSCOPE_KEY(double, "train.epsilon", "Adam denominator epsilon", c.train.epsilon),
      STAINSCOPE_KEY(int, "train.max_epochs", "epoch limit", c.train.max_epochs),
      STAINSCOPE_KEY(int, "train.patience", "epochs without validation improvement before stopping", c.train.patience),
      STAINSCOPE_KEY(double, "train.val_fraction", "share of windows held out for validation", c.train.val_fraction),
      STAINSCOPE_KEY(int, "folds", "cross-validation folds", c.folds),
      STAINSCOPE_KEY(uint64_t, "seed", "master seed", c.seed),
      STAINSCOPE_KEY(int, "jobs", "worker threads; never changes results", c.jobs),
      STAINSCOPE_KEY(uint64_t, "synth.seed", "synthetic dataset seed", c.synth.seed),
      STAINSCOPE_KEY(int, "synth.n_negative", "synthetic negative slides", c.synth.n_negative),
      STAINSCOPE_KEY(int, "synth.n_low", "synthetic low-density slides", c.synth.n_low),
      STAINSCOPE_KEY(int, "synth.n_high", "synthetic high-density slides", c.synth.n_high),
      STAINSCOPE_KEY(int, "synth.low_blobs_min", "blobs per infected site, low density, minimum", c.synth.low_blobs.lo),
      STAINSCOPE_KEY(int, "synth.low_blobs_max", "blobs per infected site, low density, maximum", c.synth.low_blobs.hi),
      STAINSCOPE_KEY(int, "synth.high_blobs_min", "blobs per infected site, high density, minimum", c.synth.high_blobs.lo),
      STAINSCOPE_KEY(int, "synth.high_blobs_max", "blobs per infected site, high density, maximum", c.synth.high_blobs.hi),
      STAINSCOPE_KEY(double, "synth.tissue_hue_lo", "tissue hue lower bound, degrees", c.synth.tissue_hue_lo),
      STAINSCOPE_KEY(double, "synth.tissue_hue_hi", "tissue hue upper bound, degrees", c.synth.tissue_hue_hi),
      STAINSCOPE_KEY(double, "synth.blob_hue_lo", "blob hue lower bound, degrees", c.synth.blob_hue_lo),
      STAINSCOPE_KEY(double, "synth.blob_hue_hi", "blob hue upper bound, degrees", c.synth.blob_hue_hi),
      STAINSCOPE_KEY(double, "synth.noise_sigma", "tissue noise, 8-bit levels", c.synth.noise_sigma),
      STAINSCOPE_KEY(double, "synth.blob_radius_lo", "smallest blob semi-axis, pixels", c.synth.blob_radius_lo),
      STAINSCOPE_KEY(double, "synth.blob_radius_hi", "largest blob semi-axis, pixels", c.synth.blob_radius_hi),
      STAINSCOPE_KEY(int, "synth.slide_size", "slide width and height, pixels", c.synth.slide_size),
      STAINSCOPE_KEY(int, "synth.site_spacing", "arc length between border sites, pixels", c.synth.site_spacing),
      STAINSCOPE_KEY(double, "synth.low_site_fraction", "share of sites infected, low density", c.synth.low_site_fraction),
      STAINSCOPE_KEY(double, "synth.high_site_fraction", "share of sites infected, high density", c.synth.high_site_fraction),
      STAINSCOPE_KEY(int, "synth.border_band", "maximum blob center depth inside the border, pixels", c.synth.border_band),
      STAINSCOPE_KEY(int, "synth.annotations_per_slide", "labeled windows written per slide, 0 for all", c.synth.annotations_per_slide),
      STAINSCOPE_KEY(double, "color.lambda", "covariance diagonal loading for color transfer", c.color_lambda),
      STAINSCOPE_KEY(bool, "color.histogram", "histogram matching after color transfer", c.color_histogram),
      STAINSCOPE_KEY(double, "gradcheck.step", "central difference half-width", c.gradcheck_step),
      STAINSCOPE_KEY(int, "gradcheck.entries", "kink-free entries compared per parameter block", c.gradcheck_entries),
      STAINSCOPE_KEY(bool, "report.svg", "write the averaged ROC plot", c.svg),
  };
  return table;
}

#undef STAINSCOPE_KEY

const Entry& find(const std::string& key) {
  for (const auto& e : entries()) {
    if (e.key.name == key) return e;
  }
  fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
}

void apply(RunConfig& c, const std::string& key, const json& value) {
  const Entry& e = find(key);
  try {
    e.set(c, value);
  } catch (const json::exception&) {
    fail(ErrorKind::kConfig, "config key '" + key + "' has the wrong type: " + value.dump());
  }
}

void apply_object(RunConfig& c, const json& obj, const std::string& prefix) {
  for (const auto& [k, v] : obj.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      apply_object(c, v, key);
    } else {
      apply(c, key, v);
    }
  }
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  json v = json::parse(value, nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded()) v = value;
  apply(*this, key, v);
}

void RunConfig::merge_json(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  require(!doc.is_discarded() && doc.is_object(), ErrorKind::kConfig, "config must be a JSON object");
  apply_object(*this, doc, "");
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  merge_json(buf.str());
}

std::string RunConfig::to_json() const {
  nlohmann::ordered_json doc;
  for (const auto& e : entries()) doc[e.key.name] = e.get(*this);
  return doc.dump(2);
}

void RunConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) { require(ok, ErrorKind::kConfig, msg); };
  check(detector.band.hi >= detector.band.lo, "band.hi must be >= band.lo");
  check(detector.epsilon > 0.0, "epsilon must be positive");
  check(detector.stride >= 1, "stride must be >= 1");
  check(detector.se_radius >= 1, "se_radius must be >= 1");
  check(detector.tissue.min_area >= 0, "min_area must be >= 0");
  check(detector.batch_size >= 1, "score_batch must be >= 1");
  check(crops_per_slide >= 1, "crops_per_slide must be >= 1");
  check(folds >= 2, "folds must be >= 2");
  check(jobs >= 1, "jobs must be >= 1");
  check(color_lambda >= 0.0, "color.lambda must be >= 0");
  check(gradcheck_step > 0.0, "gradcheck.step must be positive");
  check(gradcheck_entries >= 1, "gradcheck.entries must be >= 1");
  train.validate();
  synth.validate();
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

}  // namespace stainscope
