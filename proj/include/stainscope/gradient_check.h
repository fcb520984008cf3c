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

/// @file gradient_check.h
/// @brief Finite-difference verification of the autoencoder's backward pass.
///
/// Checks run in double precision on the same kernels used for training.
/// Relative error per entry is |analytic - numeric| / max(|analytic| + |numeric|, floor).
/// Entries whose two evaluations land on different sides of a leaky ReLU kink
/// are counted separately: the difference quotient is not a derivative there.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stainscope/autoencoder.h"

namespace stainscope {

struct GradientCheckOptions {
  double step = 1e-3;               // central difference half-width
  size_t max_entries_per_block = 24;   // kink-free entries compared per block
  size_t max_attempts_per_block = 600;  // entries tried before giving up on a block
  bool check_input = true;
  double floor = 1e-6;  // absolute scale below which differences count as noise
  uint64_t seed = 0;
};

struct GradientCheckBlock {
  std::string name;  // e.g. "layer0.conv.weight", "input"
  size_t checked = 0;
  size_t skipped_kinks = 0;  // entries whose +-step straddles a leaky ReLU kink
  double max_rel_error = 0.0;
  double max_abs_analytic = 0.0;
};

struct GradientCheckReport {
  std::vector<GradientCheckBlock> blocks;
  double max_rel_error = 0.0;
  double loss = 0.0;
};

/// Loss is MSE(model(batch), target) in train mode; target defaults to batch.
GradientCheckReport gradient_check(const AeModel& model, const Tensor& batch,
                                   const std::optional<Tensor>& target = std::nullopt,
                                   const GradientCheckOptions& options = {});

GradientCheckReport gradient_check(const BasicAeModel<double>& model, const BasicTensor<double>& batch,
                                   const BasicTensor<double>& target, const GradientCheckOptions& options);

/// Single-layer check on a small random problem (16x16 outputs, batch 2).
GradientCheckReport gradient_check_layer(LayerKind kind, const GradientCheckOptions& options = {});

/// Full default architecture on a random (2, 3, 16, 16) batch.
GradientCheckReport gradient_check_composition(const GradientCheckOptions& options = {});

}  // namespace stainscope
