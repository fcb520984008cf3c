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


/// @file run_config.h
/// @brief Every tunable of the pipeline as a documented key.
///
/// Layers apply in order: built-in defaults, a JSON config file (nested
/// objects or dotted keys), then `--set key=value` and dedicated CLI flags.
/// Unknown keys are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stainscope/autoencoder.h"
#include "stainscope/detector.h"
#include "stainscope/synth.h"

namespace stainscope {

struct RunConfig {
  DetectorConfig detector;
  TrainConfig train;
  SynthSpec synth;
  int crops_per_slide = 50;
  int folds = 10;
  uint64_t seed = 0;
  int jobs = 1;
  double color_lambda = 1e-6;
  bool color_histogram = true;
  double gradcheck_step = 1e-3;
  int gradcheck_entries = 24;
  bool svg = true;

  /// Applies one key. The value is JSON text; bare words are taken as strings.
  void set(const std::string& key, const std::string& value);
  /// Applies every key of a JSON document.
  void merge_json(const std::string& text);
  void merge_file(const std::filesystem::path& path);
  /// Flat JSON object with the current value of every key.
  std::string to_json() const;
  void validate() const;
};

struct ConfigKey {
  std::string name;
  std::string description;
};

/// All keys with their descriptions, in documentation order.
const std::vector<ConfigKey>& config_keys();

}  // namespace stainscope
