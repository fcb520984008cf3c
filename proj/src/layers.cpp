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

#include "stainscope/layers.h"

#include <Eigen/Core>

#include <cmath>

#include "stainscope/log.h"
#include "stainscope/parallel.h"

namespace stainscope {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

struct Plane {
  int channels;
  int height;
  int width;
};

// Unfolds one sample (C x H x W) into a (C*k*k) x (Ho*Wo) matrix.
template <typename T>
void im2col(const T* x, Plane in, int k, int stride, int pad, int out_h, int out_w, T* col) {
  const size_t out_size = static_cast<size_t>(out_h) * out_w;
  for (int c = 0; c < in.channels; ++c) {
    const T* xc = x + static_cast<size_t>(c) * in.height * in.width;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        T* row = col + (static_cast<size_t>(c) * k * k + ki * k + kj) * out_size;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ki;
          T* dst = row + static_cast<size_t>(oy) * out_w;
          if (iy < 0 || iy >= in.height) {
            std::fill(dst, dst + out_w, T{0});
            continue;
          }
          const T* src = xc + static_cast<size_t>(iy) * in.width;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kj;
            dst[ox] = (ix >= 0 && ix < in.width) ? src[ix] : T{0};
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters columns back onto a zeroed C x H x W plane.
template <typename T>
void col2im(const T* col, Plane in, int k, int stride, int pad, int out_h, int out_w, T* x) {
  const size_t out_size = static_cast<size_t>(out_h) * out_w;
  std::fill(x, x + static_cast<size_t>(in.channels) * in.height * in.width, T{0});
  for (int c = 0; c < in.channels; ++c) {
    T* xc = x + static_cast<size_t>(c) * in.height * in.width;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const T* row = col + (static_cast<size_t>(c) * k * k + ki * k + kj) * out_size;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= in.height) continue;
          const T* src = row + static_cast<size_t>(oy) * out_w;
          T* dst = xc + static_cast<size_t>(iy) * in.width;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kj;
            if (ix >= 0 && ix < in.width) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
std::vector<T>& scratch(int slot, size_t n) {
  thread_local std::vector<T> buffers[2];
  auto& b = buffers[slot];
  if (b.size() < n) b.resize(n);
  return b;
}

void check_activation(const Shape& s, const char* what) {
  require(s.size() == 4, ErrorKind::kInvalidShape,
          std::string(what) + " expects an NCHW tensor, got " + shape_string(s));
}

struct ConvDims {
  int n, in_c, in_h, in_w, out_c, k, out_h, out_w;
};

template <typename T>
ConvDims conv_dims(const BasicTensor<T>& input, const BasicTensor<T>& weight, ConvGeometry geo) {
  check_activation(input.shape(), "conv2d");
  require(weight.rank() == 4 && weight.dim(2) == weight.dim(3), ErrorKind::kInvalidShape,
          "conv2d weight must be (out, in, k, k), got " + shape_string(weight.shape()));
  require(weight.dim(1) == input.dim(1), ErrorKind::kInvalidShape,
          "conv2d channel mismatch: input " + shape_string(input.shape()) + " weight " +
              shape_string(weight.shape()));
  require(geo.stride >= 1 && geo.padding >= 0, ErrorKind::kInvalidShape, "conv2d geometry invalid");
  ConvDims d{input.dim(0), input.dim(1), input.dim(2), input.dim(3), weight.dim(0), weight.dim(2), 0, 0};
  d.out_h = conv_out_extent(d.in_h, d.k, geo.stride, geo.padding);
  d.out_w = conv_out_extent(d.in_w, d.k, geo.stride, geo.padding);
  require(d.in_h + 2 * geo.padding >= d.k && d.in_w + 2 * geo.padding >= d.k, ErrorKind::kInvalidShape,
          "conv2d kernel larger than padded input");
  return d;
}

// For transposed convolution the roles swap: `in_*` describe the small input
// grid and `out_*` the upsampled output plane.
template <typename T>
ConvDims tconv_dims(const BasicTensor<T>& input, const BasicTensor<T>& weight, ConvGeometry geo) {
  check_activation(input.shape(), "transposed_conv2d");
  require(weight.rank() == 4 && weight.dim(2) == weight.dim(3), ErrorKind::kInvalidShape,
          "transposed_conv2d weight must be (in, out, k, k), got " + shape_string(weight.shape()));
  require(weight.dim(0) == input.dim(1), ErrorKind::kInvalidShape,
          "transposed_conv2d channel mismatch: input " + shape_string(input.shape()) + " weight " +
              shape_string(weight.shape()));
  require(geo.stride >= 1 && geo.padding >= 0 && geo.output_padding >= 0 &&
              geo.output_padding < geo.stride,
          ErrorKind::kInvalidShape, "transposed_conv2d geometry invalid");
  ConvDims d{input.dim(0), input.dim(1), input.dim(2), input.dim(3), weight.dim(1), weight.dim(2), 0, 0};
  d.out_h = tconv_out_extent(d.in_h, d.k, geo.stride, geo.padding, geo.output_padding);
  d.out_w = tconv_out_extent(d.in_w, d.k, geo.stride, geo.padding, geo.output_padding);
  require(d.out_h >= 1 && d.out_w >= 1 &&
              conv_out_extent(d.out_h, d.k, geo.stride, geo.padding) == d.in_h &&
              conv_out_extent(d.out_w, d.k, geo.stride, geo.padding) == d.in_w,
          ErrorKind::kInvalidShape, "transposed_conv2d geometry does not invert a convolution");
  return d;
}

template <typename T>
void reduce_partials(const std::vector<T>& partials, size_t per_sample, int n, T* dst) {
  for (int s = 0; s < n; ++s) {
    const T* p = partials.data() + static_cast<size_t>(s) * per_sample;
    for (size_t i = 0; i < per_sample; ++i) dst[i] += p[i];
  }
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, ConvGeometry geo, int jobs) {
  const ConvDims d = conv_dims(input, weight, geo);
  require(bias.numel() == static_cast<size_t>(d.out_c), ErrorKind::kInvalidShape, "conv2d bias size mismatch");
  BasicTensor<T> out({d.n, d.out_c, d.out_h, d.out_w});
  const size_t in_size = static_cast<size_t>(d.in_c) * d.in_h * d.in_w;
  const size_t out_plane = static_cast<size_t>(d.out_h) * d.out_w;
  const int rows = d.in_c * d.k * d.k;
  ConstMatMap<T> w(weight.data(), d.out_c, rows);
  parallel_for(static_cast<size_t>(d.n), jobs, [&](size_t s) {
    auto& col = scratch<T>(0, rows * out_plane);
    im2col(input.data() + s * in_size, Plane{d.in_c, d.in_h, d.in_w}, d.k, geo.stride, geo.padding,
           d.out_h, d.out_w, col.data());
    MatMap<T> y(out.data() + s * d.out_c * out_plane, d.out_c, static_cast<Eigen::Index>(out_plane));
    y.noalias() = w * ConstMatMap<T>(col.data(), rows, static_cast<Eigen::Index>(out_plane));
    for (int c = 0; c < d.out_c; ++c) y.row(c).array() += bias[c];
  });
  return out;
}

template <typename T>
void conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weight, ConvGeometry geo,
                     const BasicTensor<T>& grad_out, BasicTensor<T>* grad_input,
                     BasicTensor<T>& grad_weight, BasicTensor<T>& grad_bias, int jobs) {
  const ConvDims d = conv_dims(input, weight, geo);
  require(grad_out.shape() == Shape{d.n, d.out_c, d.out_h, d.out_w}, ErrorKind::kInvalidShape,
          "conv2d_backward grad_out shape mismatch");
  require(grad_weight.shape() == weight.shape() && grad_bias.numel() == static_cast<size_t>(d.out_c),
          ErrorKind::kInvalidShape, "conv2d_backward gradient buffers mismatch");
  if (grad_input) *grad_input = BasicTensor<T>(input.shape());
  const size_t in_size = static_cast<size_t>(d.in_c) * d.in_h * d.in_w;
  const size_t out_plane = static_cast<size_t>(d.out_h) * d.out_w;
  const int rows = d.in_c * d.k * d.k;
  const size_t w_size = weight.numel();
  std::vector<T> w_partials(static_cast<size_t>(d.n) * w_size);
  std::vector<T> b_partials(static_cast<size_t>(d.n) * d.out_c);
  ConstMatMap<T> w(weight.data(), d.out_c, rows);
  parallel_for(static_cast<size_t>(d.n), jobs, [&](size_t s) {
    auto& col = scratch<T>(0, rows * out_plane);
    im2col(input.data() + s * in_size, Plane{d.in_c, d.in_h, d.in_w}, d.k, geo.stride, geo.padding,
           d.out_h, d.out_w, col.data());
    ConstMatMap<T> cols(col.data(), rows, static_cast<Eigen::Index>(out_plane));
    ConstMatMap<T> dy(grad_out.data() + s * d.out_c * out_plane, d.out_c, static_cast<Eigen::Index>(out_plane));
    MatMap<T>(w_partials.data() + s * w_size, d.out_c, rows).noalias() = dy * cols.transpose();
    // Plain loop: Eigen's vectorized sum peels by address, which breaks bitwise reproducibility.
    for (int c = 0; c < d.out_c; ++c) {
      const T* dyc = grad_out.data() + (s * d.out_c + c) * out_plane;
      T acc{0};
      for (size_t i = 0; i < out_plane; ++i) acc += dyc[i];
      b_partials[s * d.out_c + c] = acc;
    }
    if (grad_input) {
      auto& dcol = scratch<T>(1, rows * out_plane);
      MatMap<T>(dcol.data(), rows, static_cast<Eigen::Index>(out_plane)).noalias() = w.transpose() * dy;
      col2im(dcol.data(), Plane{d.in_c, d.in_h, d.in_w}, d.k, geo.stride, geo.padding, d.out_h, d.out_w,
             grad_input->data() + s * in_size);
    }
  });
  reduce_partials(w_partials, w_size, d.n, grad_weight.data());
  reduce_partials(b_partials, static_cast<size_t>(d.out_c), d.n, grad_bias.data());
}

template <typename T>
BasicTensor<T> transposed_conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                                 const BasicTensor<T>& bias, ConvGeometry geo, int jobs) {
  const ConvDims d = tconv_dims(input, weight, geo);
  require(bias.numel() == static_cast<size_t>(d.out_c), ErrorKind::kInvalidShape,
          "transposed_conv2d bias size mismatch");
  BasicTensor<T> out({d.n, d.out_c, d.out_h, d.out_w});
  const size_t in_plane = static_cast<size_t>(d.in_h) * d.in_w;
  const size_t out_size = static_cast<size_t>(d.out_c) * d.out_h * d.out_w;
  const int rows = d.out_c * d.k * d.k;
  ConstMatMap<T> w(weight.data(), d.in_c, rows);
  parallel_for(static_cast<size_t>(d.n), jobs, [&](size_t s) {
    auto& col = scratch<T>(0, rows * in_plane);
    ConstMatMap<T> x(input.data() + s * d.in_c * in_plane, d.in_c, static_cast<Eigen::Index>(in_plane));
    MatMap<T>(col.data(), rows, static_cast<Eigen::Index>(in_plane)).noalias() = w.transpose() * x;
    T* y = out.data() + s * out_size;
    col2im(col.data(), Plane{d.out_c, d.out_h, d.out_w}, d.k, geo.stride, geo.padding, d.in_h, d.in_w, y);
    const size_t plane = static_cast<size_t>(d.out_h) * d.out_w;
    for (int c = 0; c < d.out_c; ++c) {
      T* yc = y + c * plane;
      for (size_t i = 0; i < plane; ++i) yc[i] += bias[c];
    }
  });
  return out;
}

template <typename T>
void transposed_conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                                ConvGeometry geo, const BasicTensor<T>& grad_out,
                                BasicTensor<T>* grad_input, BasicTensor<T>& grad_weight,
                                BasicTensor<T>& grad_bias, int jobs) {
  const ConvDims d = tconv_dims(input, weight, geo);
  require(grad_out.shape() == Shape{d.n, d.out_c, d.out_h, d.out_w}, ErrorKind::kInvalidShape,
          "transposed_conv2d_backward grad_out shape mismatch");
  require(grad_weight.shape() == weight.shape() && grad_bias.numel() == static_cast<size_t>(d.out_c),
          ErrorKind::kInvalidShape, "transposed_conv2d_backward gradient buffers mismatch");
  if (grad_input) *grad_input = BasicTensor<T>(input.shape());
  const size_t in_plane = static_cast<size_t>(d.in_h) * d.in_w;
  const size_t out_plane = static_cast<size_t>(d.out_h) * d.out_w;
  const int rows = d.out_c * d.k * d.k;
  const size_t w_size = weight.numel();
  std::vector<T> w_partials(static_cast<size_t>(d.n) * w_size);
  std::vector<T> b_partials(static_cast<size_t>(d.n) * d.out_c);
  ConstMatMap<T> w(weight.data(), d.in_c, rows);
  parallel_for(static_cast<size_t>(d.n), jobs, [&](size_t s) {
    const T* dy = grad_out.data() + s * d.out_c * out_plane;
    auto& dcol = scratch<T>(0, rows * in_plane);
    im2col(dy, Plane{d.out_c, d.out_h, d.out_w}, d.k, geo.stride, geo.padding, d.in_h, d.in_w, dcol.data());
    ConstMatMap<T> dcols(dcol.data(), rows, static_cast<Eigen::Index>(in_plane));
    ConstMatMap<T> x(input.data() + s * d.in_c * in_plane, d.in_c, static_cast<Eigen::Index>(in_plane));
    MatMap<T>(w_partials.data() + s * w_size, d.in_c, rows).noalias() = x * dcols.transpose();
    for (int c = 0; c < d.out_c; ++c) {
      const T* dyc = dy + c * out_plane;
      T acc{0};
      for (size_t i = 0; i < out_plane; ++i) acc += dyc[i];
      b_partials[s * d.out_c + c] = acc;
    }
    if (grad_input) {
      MatMap<T>(grad_input->data() + s * d.in_c * in_plane, d.in_c, static_cast<Eigen::Index>(in_plane))
          .noalias() = w * dcols;
    }
  });
  reduce_partials(w_partials, w_size, d.n, grad_weight.data());
  reduce_partials(b_partials, static_cast<size_t>(d.out_c), d.n, grad_bias.data());
}

template <typename T>
BasicTensor<T> batch_norm(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                          const BasicTensor<T>& beta, Mode mode, BasicTensor<T>& running_mean,
                          BasicTensor<T>& running_var, BatchNormCache* cache) {
  check_activation(input.shape(), "batch_norm");
  const int n = input.dim(0), c = input.dim(1);
  const size_t plane = static_cast<size_t>(input.dim(2)) * input.dim(3);
  require(gamma.numel() == static_cast<size_t>(c) && beta.numel() == static_cast<size_t>(c) &&
              running_mean.numel() == static_cast<size_t>(c) && running_var.numel() == static_cast<size_t>(c),
          ErrorKind::kInvalidShape, "batch_norm parameter size mismatch");
  const double count = static_cast<double>(n) * plane;
  if (mode == Mode::kTrain && count <= 1.0) {
    log::warn("batch_norm: single value per channel in train mode; variance is 0");
  }
  BasicTensor<T> out(input.shape());
  if (cache) {
    cache->mean.assign(c, 0.0);
    cache->inv_std.assign(c, 0.0);
  }
  for (int ch = 0; ch < c; ++ch) {
    double mean, var;
    if (mode == Mode::kTrain) {
      double sum = 0.0;
      for (int s = 0; s < n; ++s) {
        const T* x = input.data() + (static_cast<size_t>(s) * c + ch) * plane;
        for (size_t i = 0; i < plane; ++i) sum += x[i];
      }
      mean = sum / count;
      double sq = 0.0;
      for (int s = 0; s < n; ++s) {
        const T* x = input.data() + (static_cast<size_t>(s) * c + ch) * plane;
        for (size_t i = 0; i < plane; ++i) {
          const double dx = x[i] - mean;
          sq += dx * dx;
        }
      }
      var = sq / count;
      const double unbiased = count > 1.0 ? sq / (count - 1.0) : var;
      running_mean[ch] = static_cast<T>((1.0 - kBatchNormMomentum) * running_mean[ch] + kBatchNormMomentum * mean);
      running_var[ch] = static_cast<T>((1.0 - kBatchNormMomentum) * running_var[ch] + kBatchNormMomentum * unbiased);
    } else {
      mean = running_mean[ch];
      var = running_var[ch];
    }
    const double inv_std = 1.0 / std::sqrt(var + kBatchNormEpsilon);
    if (cache) {
      cache->mean[ch] = mean;
      cache->inv_std[ch] = inv_std;
    }
    const double scale = gamma[ch] * inv_std;
    const double shift = beta[ch] - mean * scale;
    for (int s = 0; s < n; ++s) {
      const size_t off = (static_cast<size_t>(s) * c + ch) * plane;
      const T* x = input.data() + off;
      T* y = out.data() + off;
      for (size_t i = 0; i < plane; ++i) y[i] = static_cast<T>(x[i] * scale + shift);
    }
  }
  return out;
}

template <typename T>
void batch_norm_backward(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                         const BatchNormCache& cache, const BasicTensor<T>& grad_out,
                         BasicTensor<T>* grad_input, BasicTensor<T>& grad_gamma,
                         BasicTensor<T>& grad_beta) {
  check_activation(input.shape(), "batch_norm_backward");
  require(grad_out.shape() == input.shape(), ErrorKind::kInvalidShape, "batch_norm_backward shape mismatch");
  const int n = input.dim(0), c = input.dim(1);
  const size_t plane = static_cast<size_t>(input.dim(2)) * input.dim(3);
  require(cache.mean.size() == static_cast<size_t>(c), ErrorKind::kInvalidShape,
          "batch_norm_backward needs the train-mode cache");
  const double count = static_cast<double>(n) * plane;
  if (grad_input) *grad_input = BasicTensor<T>(input.shape());
  for (int ch = 0; ch < c; ++ch) {
    const double mean = cache.mean[ch], inv_std = cache.inv_std[ch];
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int s = 0; s < n; ++s) {
      const size_t off = (static_cast<size_t>(s) * c + ch) * plane;
      const T* x = input.data() + off;
      const T* dy = grad_out.data() + off;
      for (size_t i = 0; i < plane; ++i) {
        sum_dy += dy[i];
        sum_dy_xhat += dy[i] * (x[i] - mean) * inv_std;
      }
    }
    grad_beta[ch] += static_cast<T>(sum_dy);
    grad_gamma[ch] += static_cast<T>(sum_dy_xhat);
    if (!grad_input) continue;
    const double k = gamma[ch] * inv_std / count;
    for (int s = 0; s < n; ++s) {
      const size_t off = (static_cast<size_t>(s) * c + ch) * plane;
      const T* x = input.data() + off;
      const T* dy = grad_out.data() + off;
      T* dx = grad_input->data() + off;
      for (size_t i = 0; i < plane; ++i) {
        const double xhat = (x[i] - mean) * inv_std;
        dx[i] = static_cast<T>(k * (count * dy[i] - sum_dy - xhat * sum_dy_xhat));
      }
    }
  }
}

template <typename T>
void leaky_relu_inplace(BasicTensor<T>& x, double negative_slope) {
  const T slope = static_cast<T>(negative_slope);
  for (T& v : x.span()) v = v >= T{0} ? v : v * slope;
}

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& input, double negative_slope) {
  BasicTensor<T> out = input;
  leaky_relu_inplace(out, negative_slope);
  return out;
}

template <typename T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& output, const BasicTensor<T>& grad_out,
                                   double negative_slope) {
  require(output.shape() == grad_out.shape(), ErrorKind::kInvalidShape, "leaky_relu_backward shape mismatch");
  const T slope = static_cast<T>(negative_slope);
  BasicTensor<T> grad(output.shape());
  for (size_t i = 0; i < output.numel(); ++i) {
    grad[i] = output[i] >= T{0} ? grad_out[i] : grad_out[i] * slope;
  }
  return grad;
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& input) {
  BasicTensor<T> out(input.shape());
  for (size_t i = 0; i < input.numel(); ++i) out[i] = T{1} / (T{1} + std::exp(-input[i]));
  return out;
}

template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& output, const BasicTensor<T>& grad_out) {
  require(output.shape() == grad_out.shape(), ErrorKind::kInvalidShape, "sigmoid_backward shape mismatch");
  BasicTensor<T> grad(output.shape());
  for (size_t i = 0; i < output.numel(); ++i) grad[i] = grad_out[i] * output[i] * (T{1} - output[i]);
  return grad;
}

template <typename T>
double mse_loss(const BasicTensor<T>& output, const BasicTensor<T>& target) {
  require(output.shape() == target.shape(), ErrorKind::kInvalidShape,
          "mse_loss shape mismatch: " + shape_string(output.shape()) + " vs " + shape_string(target.shape()));
  double sum = 0.0;
  for (size_t i = 0; i < output.numel(); ++i) {
    const double d = static_cast<double>(output[i]) - static_cast<double>(target[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(output.numel());
}

template <typename T>
BasicTensor<T> mse_loss_grad(const BasicTensor<T>& output, const BasicTensor<T>& target) {
  require(output.shape() == target.shape(), ErrorKind::kInvalidShape, "mse_loss_grad shape mismatch");
  BasicTensor<T> grad(output.shape());
  const double scale = 2.0 / static_cast<double>(output.numel());
  for (size_t i = 0; i < output.numel(); ++i) {
    grad[i] = static_cast<T>(scale * (static_cast<double>(output[i]) - static_cast<double>(target[i])));
  }
  return grad;
}

#define STAINSCOPE_INSTANTIATE_LAYERS(T)                                                               \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,   \
                                 ConvGeometry, int);                                                    \
  template void conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, ConvGeometry,             \
                                const BasicTensor<T>&, BasicTensor<T>*, BasicTensor<T>&,                \
                                BasicTensor<T>&, int);                                                  \
  template BasicTensor<T> transposed_conv2d(const BasicTensor<T>&, const BasicTensor<T>&,               \
                                            const BasicTensor<T>&, ConvGeometry, int);                  \
  template void transposed_conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, ConvGeometry,  \
                                           const BasicTensor<T>&, BasicTensor<T>*, BasicTensor<T>&,     \
                                           BasicTensor<T>&, int);                                       \
  template BasicTensor<T> batch_norm(const BasicTensor<T>&, const BasicTensor<T>&,                      \
                                     const BasicTensor<T>&, Mode, BasicTensor<T>&, BasicTensor<T>&,     \
                                     BatchNormCache*);                                                  \
  template void batch_norm_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BatchNormCache&, \
                                    const BasicTensor<T>&, BasicTensor<T>*, BasicTensor<T>&,            \
                                    BasicTensor<T>&);                                                   \
  template BasicTensor<T> leaky_relu(const BasicTensor<T>&, double);                                    \
  template void leaky_relu_inplace(BasicTensor<T>&, double);                                            \
  template BasicTensor<T> leaky_relu_backward(const BasicTensor<T>&, const BasicTensor<T>&, double);    \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                               \
  template BasicTensor<T> sigmoid_backward(const BasicTensor<T>&, const BasicTensor<T>&);               \
  template double mse_loss(const BasicTensor<T>&, const BasicTensor<T>&);                               \
  template BasicTensor<T> mse_loss_grad(const BasicTensor<T>&, const BasicTensor<T>&);

STAINSCOPE_INSTANTIATE_LAYERS(float)
STAINSCOPE_INSTANTIATE_LAYERS(double)

}  // namespace stainscope
