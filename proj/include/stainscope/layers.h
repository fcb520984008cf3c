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

/// @file layers.h
/// @brief Forward and backward kernels for the autoencoder's layer types.
///
/// Activations are NCHW. Convolution weights are (out, in, k, k); transposed
/// convolution weights are (in, out, k, k). Backward kernels accumulate
/// parameter gradients into the supplied tensors and overwrite input grads.
/// Batch loops run on `jobs` threads; per-sample partial sums are reduced in
/// sample order so results are identical for any job count.

#pragma once

#include <cstdint>
#include <optional>

#include "stainscope/tensor.h"

namespace stainscope {

struct ConvGeometry {
  int stride = 1;
  int padding = 1;
  int output_padding = 0;  // transposed convolution only
};

inline int conv_out_extent(int in, int kernel, int stride, int padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

inline int tconv_out_extent(int in, int kernel, int stride, int padding, int output_padding) {
  return stride * (in - 1) + kernel - 2 * padding + output_padding;
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, ConvGeometry geo, int jobs = 1);

template <typename T>
void conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weight, ConvGeometry geo,
                     const BasicTensor<T>& grad_out, BasicTensor<T>* grad_input,
                     BasicTensor<T>& grad_weight, BasicTensor<T>& grad_bias, int jobs = 1);

template <typename T>
BasicTensor<T> transposed_conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                                 const BasicTensor<T>& bias, ConvGeometry geo, int jobs = 1);

template <typename T>
void transposed_conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                                ConvGeometry geo, const BasicTensor<T>& grad_out,
                                BasicTensor<T>* grad_input, BasicTensor<T>& grad_weight,
                                BasicTensor<T>& grad_bias, int jobs = 1);

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

enum class Mode { kTrain, kEval };

/// Per-channel batch statistics saved by the training forward pass.
struct BatchNormCache {
  std::vector<double> mean;
  std::vector<double> inv_std;
};

/// Train mode normalizes with batch statistics (biased variance) and updates
/// the running estimates with momentum 0.1 (unbiased variance); eval mode
/// normalizes with the running estimates.
template <typename T>
BasicTensor<T> batch_norm(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                          const BasicTensor<T>& beta, Mode mode, BasicTensor<T>& running_mean,
                          BasicTensor<T>& running_var, BatchNormCache* cache = nullptr);

/// Train-mode backward using the statistics in `cache`.
template <typename T>
void batch_norm_backward(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                         const BatchNormCache& cache, const BasicTensor<T>& grad_out,
                         BasicTensor<T>* grad_input, BasicTensor<T>& grad_gamma,
                         BasicTensor<T>& grad_beta);

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& input, double negative_slope = 0.01);

template <typename T>
void leaky_relu_inplace(BasicTensor<T>& x, double negative_slope = 0.01);

/// Backward from the forward *output*; valid because a positive slope keeps
/// the sign of every element.
template <typename T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& output, const BasicTensor<T>& grad_out,
                                   double negative_slope = 0.01);

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& output, const BasicTensor<T>& grad_out);

/// Mean of squared differences over all elements.
template <typename T>
double mse_loss(const BasicTensor<T>& output, const BasicTensor<T>& target);

/// d(mse)/d(output).
template <typename T>
BasicTensor<T> mse_loss_grad(const BasicTensor<T>& output, const BasicTensor<T>& target);

}  // namespace stainscope
