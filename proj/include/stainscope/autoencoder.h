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

/// @file autoencoder.h
/// @brief Shallow convolutional autoencoder without bottleneck.
///
/// Encoder: three (conv3x3 -> batch norm -> leaky ReLU) blocks with 32, 64, 64
/// filters and strides 1, 2, 2. Decoder: two (transposed conv3x3 stride 2 ->
/// batch norm -> leaky ReLU) blocks with 64 and 32 filters, then a stride-1
/// conv3x3 to 3 channels and a sigmoid. A 256x256x3 input produces a 64x64x64
/// latent map (262144 values), larger than the input.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stainscope/image.h"
#include "stainscope/layers.h"
#include "stainscope/tensor.h"

namespace stainscope {

enum class LayerKind : uint8_t {
  kConv = 1,
  kTransposedConv = 2,
  kBatchNorm = 3,
  kLeakyRelu = 4,
  kSigmoid = 5,
};

std::string_view to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int padding = 1;
  int output_padding = 0;
  float negative_slope = 0.01f;  // leaky ReLU only; float so it round-trips through the model file

  static LayerSpec conv(int in, int out, int stride) { return {LayerKind::kConv, in, out, 3, stride, 1, 0}; }
  static LayerSpec tconv(int in, int out, int stride) {
    return {LayerKind::kTransposedConv, in, out, 3, stride, 1, stride - 1};
  }
  static LayerSpec batch_norm(int channels) { return {LayerKind::kBatchNorm, channels, channels, 0, 1, 0, 0}; }
  static LayerSpec leaky_relu(int channels, float slope = 0.01f) {
    return {LayerKind::kLeakyRelu, channels, channels, 0, 1, 0, 0, slope};
  }
  static LayerSpec sigmoid(int channels) { return {LayerKind::kSigmoid, channels, channels, 0, 1, 0, 0}; }

  bool operator==(const LayerSpec&) const = default;
};

template <typename T>
struct Param {
  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;
};

template <typename T>
struct Layer {
  LayerSpec spec;
  std::vector<Param<T>> params;  // conv: weight, bias; batch norm: gamma, beta
  BasicTensor<T> running_mean;   // batch norm only
  BasicTensor<T> running_var;
  BatchNormCache cache;
};

/// Activations kept by a training forward pass. Leaky ReLU runs in place, so
/// the slot holding its input is released.
template <typename T>
struct ForwardTrace {
  std::vector<BasicTensor<T>> activations;
};

template <typename T>
class BasicAeModel {
 public:
  BasicAeModel() = default;
  explicit BasicAeModel(std::vector<Layer<T>> layers) : layers_(std::move(layers)) {}

  /// The fixed architecture with Kaiming (fan-in) initialization.
  static BasicAeModel make_default(uint64_t seed);

  /// Any chain of layers, for tests and per-layer gradient checks.
  static BasicAeModel from_specs(const std::vector<LayerSpec>& specs, uint64_t seed);

  std::vector<Layer<T>>& layers() { return layers_; }
  const std::vector<Layer<T>>& layers() const { return layers_; }

  /// Forward pass. With a trace, activations needed by backward() are kept.
  BasicTensor<T> forward(const BasicTensor<T>& input, Mode mode, int jobs = 1,
                         ForwardTrace<T>* trace = nullptr);

  /// Accumulates parameter gradients; returns d(loss)/d(input).
  BasicTensor<T> backward(ForwardTrace<T>& trace, const BasicTensor<T>& grad_output, int jobs = 1);

  void zero_grad();
  size_t parameter_count() const;

  template <typename U>
  BasicAeModel<U> cast() const;

  /// Bitwise equality of specs, parameters and running statistics.
  bool same_weights(const BasicAeModel& other) const;

 private:
  std::vector<Layer<T>> layers_;
};

using AeModel = BasicAeModel<float>;

std::vector<LayerSpec> default_architecture();

/// Encoder output shape for an input of the given spatial size.
Shape latent_shape(int height, int width);

/// Eval-mode reconstruction of an (N, 3, 256, 256) batch in [0, 1].
Tensor reconstruct(const AeModel& model, const Tensor& batch, int jobs = 1);

/// Packs 8-bit RGB images into an NCHW batch scaled to [0, 1].
Tensor images_to_batch(const std::vector<const Image*>& images);
/// Sample `index` of an NCHW [0, 1] batch, rounded to 8-bit RGB.
Image batch_to_image(const Tensor& batch, int index);

/// Convenience: reconstruct a list of patches into 8-bit images.
std::vector<Image> reconstruct_images(const AeModel& model, const std::vector<const Image*>& images,
                                      int batch_size = 8, int jobs = 1);

// --- optimization ----------------------------------------------------------

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int64_t t = 0;
};

/// One bias-corrected Adam step on a parameter block.
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, AdamState& state, const AdamConfig& config);

struct TrainConfig {
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 100;
  int patience = 5;
  double val_fraction = 0.1;
  uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainingLog {
  size_t training_windows = 0;
  size_t train_count = 0;
  size_t val_count = 0;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double initial_train_loss = 0.0;  // loss of the initialized model on the train split

  /// CSV `epoch,train_loss,val_loss` preceded by `#` metadata lines and
  /// followed by `# best_epoch,<n>`.
  void write_csv(std::ostream& out) const;
};

struct TrainResult {
  AeModel model;
  TrainingLog log;
};

/// Images must be 256x256 RGB. Holds out `val_fraction`, minimizes MSE with
/// Adam and returns the model with the lowest validation loss.
TrainResult train_autoencoder(const std::vector<Image>& patches, const TrainConfig& config);

// --- persistence -----------------------------------------------------------

void save_model(const AeModel& model, const std::filesystem::path& path);
AeModel load_model(const std::filesystem::path& path);
void write_model(const AeModel& model, std::ostream& out);
AeModel read_model(std::istream& in);

}  // namespace stainscope
