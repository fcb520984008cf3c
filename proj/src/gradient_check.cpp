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

#include "stainscope/gradient_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stainscope/rng.h"

namespace stainscope {
namespace {

using DModel = BasicAeModel<double>;
using DTensor = BasicTensor<double>;

// Sign pattern of every leaky ReLU output; a central difference is only
// meaningful when both evaluations stay on the same linear piece.
std::vector<uint8_t> kink_signature(const DModel& model, const ForwardTrace<double>& trace) {
  std::vector<uint8_t> signs;
  for (size_t i = 0; i < model.layers().size(); ++i) {
    if (model.layers()[i].spec.kind != LayerKind::kLeakyRelu) continue;
    for (double v : trace.activations[i + 1].span()) signs.push_back(v >= 0.0);
  }
  return signs;
}

struct Probe {
  double loss;
  std::vector<uint8_t> signs;
};

Probe loss_at(DModel& model, const DTensor& x, const DTensor& target) {
  // Batch statistics only; running statistics do not enter the loss.
  ForwardTrace<double> trace;
  const DTensor out = model.forward(x, Mode::kTrain, 1, &trace);
  return {mse_loss(out, target), kink_signature(model, trace)};
}

std::vector<size_t> sample_indices(size_t n, size_t max_count, Rng& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  if (n <= max_count) return idx;
  rng.shuffle(idx);
  idx.resize(max_count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void accumulate(GradientCheckBlock& block, const Probe& up, const Probe& down, double analytic, double step,
                double floor) {
  if (up.signs != down.signs) {
    ++block.skipped_kinks;
    return;
  }
  const double numeric = (up.loss - down.loss) / (2.0 * step);
  const double rel = std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), floor);
  block.max_rel_error = std::max(block.max_rel_error, rel);
  block.max_abs_analytic = std::max(block.max_abs_analytic, std::abs(analytic));
  ++block.checked;
}

DTensor random_tensor(const Shape& shape, Rng& rng, double lo, double hi) {
  DTensor t(shape);
  for (double& v : t.span()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

GradientCheckReport gradient_check(const DModel& model_in, const DTensor& batch, const DTensor& target,
                                   const GradientCheckOptions& options) {
  DModel model = model_in;
  GradientCheckReport report;
  Rng rng(derive_seed(options.seed, 77));

  ForwardTrace<double> trace;
  model.zero_grad();
  const DTensor out = model.forward(batch, Mode::kTrain, 1, &trace);
  report.loss = mse_loss(out, target);
  const DTensor grad_input = model.backward(trace, mse_loss_grad(out, target));

  const double h = options.step;
  for (size_t li = 0; li < model.layers().size(); ++li) {
    auto& layer = model.layers()[li];
    for (auto& p : layer.params) {
      GradientCheckBlock block;
      block.name = "layer" + std::to_string(li) + "." + std::string(to_string(layer.spec.kind)) + "." + p.name;
      for (size_t i : sample_indices(p.value.numel(), options.max_attempts_per_block, rng)) {
        if (block.checked >= options.max_entries_per_block) break;
        const double saved = p.value[i];
        p.value[i] = saved + h;
        const Probe up = loss_at(model, batch, target);
        p.value[i] = saved - h;
        const Probe down = loss_at(model, batch, target);
        p.value[i] = saved;
        accumulate(block, up, down, p.grad[i], h, options.floor);
      }
      report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
      report.blocks.push_back(std::move(block));
    }
  }
  if (options.check_input) {
    GradientCheckBlock block;
    block.name = "input";
    DTensor x = batch;
    for (size_t i : sample_indices(x.numel(), options.max_attempts_per_block, rng)) {
      if (block.checked >= options.max_entries_per_block) break;
      const double saved = x[i];
      x[i] = saved + h;
      const Probe up = loss_at(model, x, target);
      x[i] = saved - h;
      const Probe down = loss_at(model, x, target);
      x[i] = saved;
      accumulate(block, up, down, grad_input[i], h, options.floor);
    }
    report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
    report.blocks.push_back(std::move(block));
  }
  return report;
}

GradientCheckReport gradient_check(const AeModel& model, const Tensor& batch, const std::optional<Tensor>& target,
                                   const GradientCheckOptions& options) {
  const DTensor x = batch.cast<double>();
  const DTensor t = target ? target->cast<double>() : x;
  return gradient_check(model.cast<double>(), x, t, options);
}

GradientCheckReport gradient_check_layer(LayerKind kind, const GradientCheckOptions& options) {
  Rng rng(derive_seed(options.seed, 11));
  std::vector<LayerSpec> specs;
  Shape input_shape;
  switch (kind) {
    case LayerKind::kConv:
      specs = {LayerSpec::conv(3, 4, 2)};
      input_shape = {2, 3, 16, 16};
      break;
    case LayerKind::kTransposedConv:
      specs = {LayerSpec::tconv(4, 3, 2)};
      input_shape = {2, 4, 8, 8};
      break;
    case LayerKind::kBatchNorm:
      specs = {LayerSpec::batch_norm(3)};
      input_shape = {2, 3, 16, 16};
      break;
    case LayerKind::kLeakyRelu:
      specs = {LayerSpec::leaky_relu(3)};
      input_shape = {2, 3, 16, 16};
      break;
    case LayerKind::kSigmoid:
      specs = {LayerSpec::sigmoid(3)};
      input_shape = {2, 3, 16, 16};
      break;
  }
  DModel model = DModel::from_specs(specs, derive_seed(options.seed, 12));
  for (auto& layer : model.layers()) {
    for (auto& p : layer.params) {
      for (double& v : p.value.span()) v = rng.uniform(-1.0, 1.0);
    }
  }
  DTensor x = random_tensor(input_shape, rng, -1.0, 1.0);
  if (kind == LayerKind::kLeakyRelu) {
    // Keep samples away from the kink so the two-sided difference is smooth.
    for (double& v : x.span()) {
      if (std::abs(v) < 4.0 * options.step) v = v < 0.0 ? -0.1 : 0.1;
    }
  }
  DModel probe = model;
  const DTensor out = probe.forward(x, Mode::kTrain);
  const DTensor target = random_tensor(out.shape(), rng, -1.0, 1.0);
  return gradient_check(model, x, target, options);
}

GradientCheckReport gradient_check_composition(const GradientCheckOptions& options) {
  Rng rng(derive_seed(options.seed, 21));
  DModel model = DModel::from_specs(default_architecture(), derive_seed(options.seed, 22));
  // Non-trivial affine batch-norm parameters exercise the gamma/beta paths.
  for (auto& layer : model.layers()) {
    if (layer.spec.kind != LayerKind::kBatchNorm) continue;
    for (double& v : layer.params[0].value.span()) v = rng.uniform(0.5, 1.5);
    for (double& v : layer.params[1].value.span()) v = rng.uniform(-0.5, 0.5);
  }
  const DTensor x = random_tensor({2, 3, 16, 16}, rng, 0.0, 1.0);
  const DTensor target = random_tensor({2, 3, 16, 16}, rng, 0.0, 1.0);
  return gradient_check(model, x, target, options);
}

}  // namespace stainscope
