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

#include "stainscope/autoencoder.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "stainscope/log.h"
#include "stainscope/rng.h"

namespace stainscope {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kTransposedConv: return "tconv";
    case LayerKind::kBatchNorm: return "batchnorm";
    case LayerKind::kLeakyRelu: return "leakyrelu";
    case LayerKind::kSigmoid: return "sigmoid";
  }
  return "unknown";
}

std::vector<LayerSpec> default_architecture() {
  return {
      LayerSpec::conv(3, 32, 1),        LayerSpec::batch_norm(32), LayerSpec::leaky_relu(32),
      LayerSpec::conv(32, 64, 2),       LayerSpec::batch_norm(64), LayerSpec::leaky_relu(64),
      LayerSpec::conv(64, 64, 2),       LayerSpec::batch_norm(64), LayerSpec::leaky_relu(64),
      LayerSpec::tconv(64, 64, 2),      LayerSpec::batch_norm(64), LayerSpec::leaky_relu(64),
      LayerSpec::tconv(64, 32, 2),      LayerSpec::batch_norm(32), LayerSpec::leaky_relu(32),
      LayerSpec::conv(32, 3, 1),        LayerSpec::sigmoid(3),
  };
}

Shape latent_shape(int height, int width) {
  int channels = 3;
  for (const LayerSpec& spec : default_architecture()) {
    if (spec.kind == LayerKind::kTransposedConv) break;
    if (spec.kind != LayerKind::kConv) continue;
    height = conv_out_extent(height, spec.kernel, spec.stride, spec.padding);
    width = conv_out_extent(width, spec.kernel, spec.stride, spec.padding);
    channels = spec.out_channels;
  }
  return {channels, height, width};
}

namespace {

bool has_weights(LayerKind kind) { return kind == LayerKind::kConv || kind == LayerKind::kTransposedConv; }

Shape weight_shape(const LayerSpec& spec) {
  // Transposed convolution stores (in, out, k, k).
  return spec.kind == LayerKind::kConv ? Shape{spec.out_channels, spec.in_channels, spec.kernel, spec.kernel}
                                       : Shape{spec.in_channels, spec.out_channels, spec.kernel, spec.kernel};
}

void validate_chain(const std::vector<LayerSpec>& specs, ErrorKind kind) {
  require(!specs.empty(), kind, "model has no layers");
  for (size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& s = specs[i];
    require(s.in_channels >= 1 && s.out_channels >= 1, kind, "layer " + std::to_string(i) + " has no channels");
    if (has_weights(s.kind)) {
      require(s.kernel == 3, kind, "layer " + std::to_string(i) + ": kernel must be 3");
      require(s.stride == 1 || s.stride == 2, kind, "layer " + std::to_string(i) + ": stride must be 1 or 2");
      require(s.padding >= 0 && s.output_padding >= 0 && s.output_padding < s.stride, kind,
              "layer " + std::to_string(i) + ": invalid padding");
    } else {
      require(s.in_channels == s.out_channels, kind, "layer " + std::to_string(i) + ": channel mismatch");
    }
    if (s.kind == LayerKind::kLeakyRelu) {
      require(s.negative_slope > 0.0, kind, "leaky relu slope must be positive");
    }
    if (i > 0) {
      require(specs[i - 1].out_channels == s.in_channels, kind,
              "layer " + std::to_string(i) + " expects " + std::to_string(s.in_channels) +
                  " channels but previous layer produces " + std::to_string(specs[i - 1].out_channels));
    }
  }
}

template <typename T>
Layer<T> make_layer(const LayerSpec& spec) {
  Layer<T> layer;
  layer.spec = spec;
  if (has_weights(spec.kind)) {
    const Shape ws = weight_shape(spec);
    layer.params.push_back({"weight", BasicTensor<T>(ws), BasicTensor<T>(ws)});
    layer.params.push_back({"bias", BasicTensor<T>({spec.out_channels}), BasicTensor<T>({spec.out_channels})});
  } else if (spec.kind == LayerKind::kBatchNorm) {
    const int c = spec.out_channels;
    layer.params.push_back({"gamma", BasicTensor<T>({c}, T{1}), BasicTensor<T>({c})});
    layer.params.push_back({"beta", BasicTensor<T>({c}), BasicTensor<T>({c})});
    layer.running_mean = BasicTensor<T>({c}, T{0});
    layer.running_var = BasicTensor<T>({c}, T{1});
  }
  return layer;
}

}  // namespace

template <typename T>
BasicAeModel<T> BasicAeModel<T>::from_specs(const std::vector<LayerSpec>& specs, uint64_t seed) {
  validate_chain(specs, ErrorKind::kInvalidInput);
  std::vector<Layer<T>> layers;
  for (size_t i = 0; i < specs.size(); ++i) {
    Layer<T> layer = make_layer<T>(specs[i]);
    if (has_weights(specs[i].kind)) {
      const LayerSpec& s = specs[i];
      const bool feeds_sigmoid = i + 1 < specs.size() && specs[i + 1].kind == LayerKind::kSigmoid;
      const double slope = 0.01;
      const double gain = feeds_sigmoid ? 1.0 : 2.0 / (1.0 + slope * slope);
      // Effective taps per output pixel; stride-2 transposed convs touch ~k^2/4.
      double fan_in = static_cast<double>(s.in_channels) * s.kernel * s.kernel;
      if (s.kind == LayerKind::kTransposedConv) fan_in /= static_cast<double>(s.stride * s.stride);
      const double sigma = std::sqrt(gain / fan_in);
      Rng rng(derive_seed(seed, i));
      for (T& w : layer.params[0].value.span()) w = static_cast<T>(rng.normal(0.0, sigma));
    }
    layers.push_back(std::move(layer));
  }
  return BasicAeModel<T>(std::move(layers));
}

template <typename T>
BasicAeModel<T> BasicAeModel<T>::make_default(uint64_t seed) {
  const Shape latent = latent_shape(kPatchSize, kPatchSize);
  require(shape_numel(latent) > static_cast<size_t>(3) * kPatchSize * kPatchSize, ErrorKind::kInvalidInput,
          "autoencoder latent map must be larger than its input");
  return from_specs(default_architecture(), seed);
}

template <typename T>
BasicTensor<T> BasicAeModel<T>::forward(const BasicTensor<T>& input, Mode mode, int jobs,
                                        ForwardTrace<T>* trace) {
  std::vector<BasicTensor<T>> local;
  auto& acts = trace ? trace->activations : local;
  acts.clear();
  acts.resize(layers_.size() + 1);
  acts[0] = input;
  for (size_t i = 0; i < layers_.size(); ++i) {
    Layer<T>& layer = layers_[i];
    const LayerSpec& s = layer.spec;
    BasicTensor<T>& x = acts[i];
    const ConvGeometry geo{s.stride, s.padding, s.output_padding};
    switch (s.kind) {
      case LayerKind::kConv:
        acts[i + 1] = conv2d(x, layer.params[0].value, layer.params[1].value, geo, jobs);
        break;
      case LayerKind::kTransposedConv:
        acts[i + 1] = transposed_conv2d(x, layer.params[0].value, layer.params[1].value, geo, jobs);
        break;
      case LayerKind::kBatchNorm:
        acts[i + 1] = batch_norm(x, layer.params[0].value, layer.params[1].value, mode, layer.running_mean,
                                 layer.running_var, &layer.cache);
        break;
      case LayerKind::kLeakyRelu:
        acts[i + 1] = std::move(x);
        leaky_relu_inplace(acts[i + 1], s.negative_slope);
        break;
      case LayerKind::kSigmoid:
        acts[i + 1] = sigmoid(x);
        break;
    }
    if (!trace) x.release();
  }
  return trace ? acts.back() : std::move(acts.back());
}

template <typename T>
BasicTensor<T> BasicAeModel<T>::backward(ForwardTrace<T>& trace, const BasicTensor<T>& grad_output, int jobs) {
  auto& acts = trace.activations;
  require(acts.size() == layers_.size() + 1, ErrorKind::kInvalidInput, "backward called without a forward trace");
  require(grad_output.shape() == acts.back().shape(), ErrorKind::kInvalidShape, "grad_output shape mismatch");
  BasicTensor<T> grad = grad_output;
  for (size_t i = layers_.size(); i-- > 0;) {
    Layer<T>& layer = layers_[i];
    const LayerSpec& s = layer.spec;
    const ConvGeometry geo{s.stride, s.padding, s.output_padding};
    BasicTensor<T> grad_in;
    switch (s.kind) {
      case LayerKind::kConv:
        conv2d_backward(acts[i], layer.params[0].value, geo, grad, &grad_in, layer.params[0].grad,
                        layer.params[1].grad, jobs);
        break;
      case LayerKind::kTransposedConv:
        transposed_conv2d_backward(acts[i], layer.params[0].value, geo, grad, &grad_in, layer.params[0].grad,
                                   layer.params[1].grad, jobs);
        break;
      case LayerKind::kBatchNorm:
        batch_norm_backward(acts[i], layer.params[0].value, layer.cache, grad, &grad_in, layer.params[0].grad,
                            layer.params[1].grad);
        break;
      case LayerKind::kLeakyRelu:
        grad_in = leaky_relu_backward(acts[i + 1], grad, s.negative_slope);
        break;
      case LayerKind::kSigmoid:
        grad_in = sigmoid_backward(acts[i + 1], grad);
        break;
    }
    acts[i + 1].release();
    grad = std::move(grad_in);
  }
  return grad;
}

template <typename T>
void BasicAeModel<T>::zero_grad() {
  for (auto& layer : layers_) {
    for (auto& p : layer.params) p.grad.fill(T{0});
  }
}

template <typename T>
size_t BasicAeModel<T>::parameter_count() const {
  size_t n = 0;
  for (const auto& layer : layers_) {
    for (const auto& p : layer.params) n += p.value.numel();
  }
  return n;
}

template <typename T>
template <typename U>
BasicAeModel<U> BasicAeModel<T>::cast() const {
  std::vector<Layer<U>> out;
  for (const auto& layer : layers_) {
    Layer<U> l;
    l.spec = layer.spec;
    for (const auto& p : layer.params) l.params.push_back({p.name, p.value.template cast<U>(), p.grad.template cast<U>()});
    if (!layer.running_mean.empty()) {
      l.running_mean = layer.running_mean.template cast<U>();
      l.running_var = layer.running_var.template cast<U>();
    }
    out.push_back(std::move(l));
  }
  return BasicAeModel<U>(std::move(out));
}

template <typename T>
bool BasicAeModel<T>::same_weights(const BasicAeModel& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (!(a.spec == b.spec) || a.params.size() != b.params.size()) return false;
    for (size_t j = 0; j < a.params.size(); ++j) {
      const auto& x = a.params[j].value;
      const auto& y = b.params[j].value;
      if (x.shape() != y.shape() || std::memcmp(x.data(), y.data(), x.numel() * sizeof(T)) != 0) return false;
    }
    if (a.running_mean.numel() != b.running_mean.numel()) return false;
    if (a.running_mean.numel() &&
        (std::memcmp(a.running_mean.data(), b.running_mean.data(), a.running_mean.numel() * sizeof(T)) != 0 ||
         std::memcmp(a.running_var.data(), b.running_var.data(), a.running_var.numel() * sizeof(T)) != 0)) {
      return false;
    }
  }
  return true;
}

template class BasicAeModel<float>;
template class BasicAeModel<double>;
template BasicAeModel<double> BasicAeModel<float>::cast<double>() const;
template BasicAeModel<float> BasicAeModel<double>::cast<float>() const;

// --- inference ---------------------------------------------------------------

Tensor reconstruct(const AeModel& model, const Tensor& batch, int jobs) {
  require(batch.rank() == 4 && batch.dim(1) == 3 && batch.dim(2) == kPatchSize && batch.dim(3) == kPatchSize,
          ErrorKind::kInvalidShape, "reconstruct expects (N, 3, 256, 256), got " + shape_string(batch.shape()));
  // Eval mode never writes running statistics, but forward() is shared with
  // training; a shallow copy keeps the model itself immutable.
  AeModel local = model;
  return local.forward(batch, Mode::kEval, jobs);
}

Tensor images_to_batch(const std::vector<const Image*>& images) {
  require(!images.empty(), ErrorKind::kInvalidInput, "empty image batch");
  const int h = images[0]->height(), w = images[0]->width();
  Tensor batch({static_cast<int>(images.size()), 3, h, w});
  const size_t plane = static_cast<size_t>(h) * w;
  for (size_t n = 0; n < images.size(); ++n) {
    const Image& img = *images[n];
    require(img.channels() == 3 && img.width() == w && img.height() == h, ErrorKind::kInvalidShape,
            "batch images must share dimensions and be RGB");
    const auto src = img.data();
    float* dst = batch.data() + n * 3 * plane;
    for (size_t i = 0; i < plane; ++i) {
      for (int c = 0; c < 3; ++c) dst[c * plane + i] = static_cast<float>(src[3 * i + c] / 255.0);
    }
  }
  return batch;
}

Image batch_to_image(const Tensor& batch, int index) {
  require(batch.rank() == 4 && batch.dim(1) == 3 && index >= 0 && index < batch.dim(0), ErrorKind::kInvalidShape,
          "batch_to_image index or shape invalid");
  const int h = batch.dim(2), w = batch.dim(3);
  const size_t plane = static_cast<size_t>(h) * w;
  Image img(w, h, 3);
  auto dst = img.data();
  const float* src = batch.data() + static_cast<size_t>(index) * 3 * plane;
  for (size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(static_cast<double>(src[c * plane + i]), 0.0, 1.0);
      dst[3 * i + c] = static_cast<uint8_t>(std::lround(v * 255.0));
    }
  }
  return img;
}

std::vector<Image> reconstruct_images(const AeModel& model, const std::vector<const Image*>& images,
                                      int batch_size, int jobs) {
  std::vector<Image> out;
  out.reserve(images.size());
  AeModel local = model;
  const size_t step = static_cast<size_t>(std::max(1, batch_size));
  for (size_t start = 0; start < images.size(); start += step) {
    const size_t end = std::min(images.size(), start + step);
    std::vector<const Image*> chunk(images.begin() + static_cast<std::ptrdiff_t>(start),
                                    images.begin() + static_cast<std::ptrdiff_t>(end));
    const Tensor batch = images_to_batch(chunk);
    require(batch.dim(2) == kPatchSize && batch.dim(3) == kPatchSize, ErrorKind::kInvalidShape,
            "reconstruct expects 256x256 patches");
    const Tensor rec = local.forward(batch, Mode::kEval, jobs);
    for (size_t i = 0; i < chunk.size(); ++i) out.push_back(batch_to_image(rec, static_cast<int>(i)));
  }
  return out;
}

// --- optimization ------------------------------------------------------------

template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, AdamState& state, const AdamConfig& config) {
  require(param.size() == grad.size(), ErrorKind::kInvalidShape, "adam_update size mismatch");
  if (state.m.size() != param.size()) {
    state.m.assign(param.size(), 0.0);
    state.v.assign(param.size(), 0.0);
    state.t = 0;
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    param[i] = static_cast<T>(param[i] - config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon));
  }
}

template void adam_update(std::span<float>, std::span<const float>, AdamState&, const AdamConfig&);
template void adam_update(std::span<double>, std::span<const double>, AdamState&, const AdamConfig&);

void TrainConfig::validate() const {
  require(batch_size >= 1, ErrorKind::kConfig, "batch_size must be >= 1");
  require(learning_rate > 0.0, ErrorKind::kConfig, "learning_rate must be > 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorKind::kConfig,
          "Adam betas must lie in [0, 1)");
  require(epsilon > 0.0, ErrorKind::kConfig, "Adam epsilon must be > 0");
  require(max_epochs >= 1, ErrorKind::kConfig, "max_epochs must be >= 1");
  require(patience >= 1 && patience <= max_epochs, ErrorKind::kConfig, "patience must lie in [1, max_epochs]");
  require(val_fraction > 0.0 && val_fraction < 1.0, ErrorKind::kConfig, "val_fraction must lie in (0, 1)");
  require(jobs >= 1, ErrorKind::kConfig, "jobs must be >= 1");
}

void TrainingLog::write_csv(std::ostream& out) const {
  std::ostringstream s;
  s << std::setprecision(9);
  s << "# training_windows," << training_windows << '\n';
  s << "# train_count," << train_count << '\n';
  s << "# val_count," << val_count << '\n';
  s << "# initial_train_loss," << initial_train_loss << '\n';
  s << "epoch,train_loss,val_loss\n";
  for (const auto& e : epochs) s << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
  s << "# best_epoch," << best_epoch << '\n';
  out << s.str();
}

namespace {

double eval_loss(const AeModel& model, const std::vector<Image>& patches, const std::vector<size_t>& idx,
                 int batch_size, int jobs) {
  if (idx.empty()) return 0.0;
  AeModel local = model;
  double total = 0.0;
  for (size_t start = 0; start < idx.size(); start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(idx.size(), start + static_cast<size_t>(batch_size));
    std::vector<const Image*> chunk;
    for (size_t i = start; i < end; ++i) chunk.push_back(&patches[idx[i]]);
    const Tensor x = images_to_batch(chunk);
    const Tensor y = local.forward(x, Mode::kEval, jobs);
    total += mse_loss(y, x) * static_cast<double>(chunk.size());
  }
  return total / static_cast<double>(idx.size());
}

}  // namespace

TrainResult train_autoencoder(const std::vector<Image>& patches, const TrainConfig& config) {
  config.validate();
  require(!patches.empty(), ErrorKind::kInvalidInput, "no training patches");
  for (const Image& p : patches) {
    require(p.width() == kPatchSize && p.height() == kPatchSize && p.channels() == 3, ErrorKind::kInvalidInput,
            "training patches must be 256x256 RGB");
  }
  std::vector<size_t> order(patches.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng(derive_seed(config.seed, 1));
  split_rng.shuffle(order);
  size_t val_count = 0;
  if (patches.size() >= 2) {
    const auto rounded = static_cast<size_t>(std::llround(config.val_fraction * static_cast<double>(patches.size())));
    val_count = std::clamp<size_t>(rounded, 1, patches.size() - 1);
  }
  std::vector<size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(val_count), order.end());
  std::vector<size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(val_count));

  TrainResult result;
  TrainingLog& log = result.log;
  log.training_windows = patches.size();
  log.train_count = train_idx.size();
  log.val_count = val_idx.size();

  AeModel model = AeModel::make_default(derive_seed(config.seed, 2));
  const AdamConfig adam{config.learning_rate, config.beta1, config.beta2, config.epsilon};
  std::vector<AdamState> states;
  for (const auto& layer : model.layers()) states.resize(states.size() + layer.params.size());

  AeModel best = model;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  bool first_batch = true;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng epoch_rng(derive_seed(config.seed, 1000 + static_cast<uint64_t>(epoch)));
    epoch_rng.shuffle(train_idx);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < train_idx.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(train_idx.size(), start + static_cast<size_t>(config.batch_size));
      std::vector<const Image*> chunk;
      for (size_t i = start; i < end; ++i) chunk.push_back(&patches[train_idx[i]]);
      const Tensor x = images_to_batch(chunk);
      ForwardTrace<float> trace;
      const Tensor y = model.forward(x, Mode::kTrain, config.jobs, &trace);
      const double loss = mse_loss(y, x);
      if (first_batch) {
        log.initial_train_loss = loss;
        first_batch = false;
      }
      epoch_loss += loss * static_cast<double>(chunk.size());
      model.zero_grad();
      model.backward(trace, mse_loss_grad(y, x), config.jobs);
      size_t k = 0;
      for (auto& layer : model.layers()) {
        for (auto& p : layer.params) {
          adam_update<float>(p.value.span(), p.grad.span(), states[k++], adam);
        }
      }
    }
    const double train_loss = epoch_loss / static_cast<double>(train_idx.size());
    const double val_loss =
        val_idx.empty() ? train_loss : eval_loss(model, patches, val_idx, config.batch_size, config.jobs);
    log.epochs.push_back({epoch, train_loss, val_loss});
    log::info("epoch " + std::to_string(epoch) + " train_loss " + std::to_string(train_loss) + " val_loss " +
              std::to_string(val_loss));
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = model;
      log.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  result.model = std::move(best);
  return result;
}

// --- persistence -------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'A', 'E', '1'};
constexpr uint16_t kFormatVersion = 1;

void put_u8(std::ostream& out, uint8_t v) { out.put(static_cast<char>(v)); }

void put_u16(std::ostream& out, uint16_t v) {
  put_u8(out, static_cast<uint8_t>(v & 0xff));
  put_u8(out, static_cast<uint8_t>(v >> 8));
}

void put_u32(std::ostream& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) put_u8(out, static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_floats(std::ostream& out, std::span<const float> values) {
  for (float f : values) put_u32(out, std::bit_cast<uint32_t>(f));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  uint8_t u8() {
    const int c = in_.get();
    require(c != std::char_traits<char>::eof(), ErrorKind::kCorruptModel, "model file truncated");
    return static_cast<uint8_t>(c);
  }
  uint16_t u16() {
    const uint16_t lo = u8();
    return static_cast<uint16_t>(lo | (static_cast<uint16_t>(u8()) << 8));
  }
  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(u8()) << (8 * i);
    return v;
  }
  void floats(std::span<float> dst) {
    for (float& f : dst) f = std::bit_cast<float>(u32());
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
};

int checked_extent(uint32_t v) {
  require(v <= 1u << 16, ErrorKind::kCorruptModel, "implausible layer extent " + std::to_string(v));
  return static_cast<int>(v);
}

}  // namespace

void write_model(const AeModel& model, std::ostream& out) {
  out.write(kMagic, 4);
  put_u16(out, kFormatVersion);
  put_u16(out, static_cast<uint16_t>(model.layers().size()));
  for (const auto& layer : model.layers()) {
    const LayerSpec& s = layer.spec;
    put_u8(out, static_cast<uint8_t>(s.kind));
    std::vector<uint32_t> extents;
    if (has_weights(s.kind)) {
      extents = {static_cast<uint32_t>(s.in_channels), static_cast<uint32_t>(s.out_channels),
                 static_cast<uint32_t>(s.kernel),      static_cast<uint32_t>(s.stride),
                 static_cast<uint32_t>(s.padding),     static_cast<uint32_t>(s.output_padding)};
    } else {
      extents = {static_cast<uint32_t>(s.out_channels)};
    }
    put_u8(out, static_cast<uint8_t>(extents.size()));
    for (uint32_t e : extents) put_u32(out, e);
    for (const auto& p : layer.params) put_floats(out, p.value.span());
    if (s.kind == LayerKind::kBatchNorm) {
      put_floats(out, layer.running_mean.span());
      put_floats(out, layer.running_var.span());
    }
    if (s.kind == LayerKind::kLeakyRelu) {
      const float slope = s.negative_slope;
      put_floats(out, std::span<const float>(&slope, 1));
    }
  }
  require(static_cast<bool>(out), ErrorKind::kIo, "failed writing model stream");
}

AeModel read_model(std::istream& in) {
  Reader r(in);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  require(std::memcmp(magic, kMagic, 4) == 0, ErrorKind::kCorruptModel, "bad magic bytes");
  const uint16_t version = r.u16();
  require(version == kFormatVersion, ErrorKind::kCorruptModel, "unsupported format version " + std::to_string(version));
  const uint16_t count = r.u16();
  require(count >= 1, ErrorKind::kCorruptModel, "model has no layers");
  std::vector<LayerSpec> specs;
  std::vector<Layer<float>> layers;
  for (uint16_t i = 0; i < count; ++i) {
    const uint8_t tag = r.u8();
    require(tag >= 1 && tag <= 5, ErrorKind::kCorruptModel, "unknown layer kind " + std::to_string(tag));
    LayerSpec s;
    s.kind = static_cast<LayerKind>(tag);
    const uint8_t n_extents = r.u8();
    std::vector<int> extents;
    for (uint8_t e = 0; e < n_extents; ++e) extents.push_back(checked_extent(r.u32()));
    if (has_weights(s.kind)) {
      require(extents.size() == 6, ErrorKind::kCorruptModel, "convolution layer needs 6 extents");
      s.in_channels = extents[0];
      s.out_channels = extents[1];
      s.kernel = extents[2];
      s.stride = extents[3];
      s.padding = extents[4];
      s.output_padding = extents[5];
    } else {
      require(extents.size() == 1, ErrorKind::kCorruptModel, "layer needs 1 extent");
      s.in_channels = s.out_channels = extents[0];
      s.kernel = 0;
      s.padding = 0;
    }
    specs.push_back(s);
    validate_chain(specs, ErrorKind::kCorruptModel);
    Layer<float> layer = make_layer<float>(s);
    for (auto& p : layer.params) r.floats(p.value.span());
    if (s.kind == LayerKind::kBatchNorm) {
      r.floats(layer.running_mean.span());
      r.floats(layer.running_var.span());
    }
    if (s.kind == LayerKind::kLeakyRelu) {
      float slope = 0.0f;
      r.floats(std::span<float>(&slope, 1));
      layer.spec.negative_slope = slope;
      specs.back().negative_slope = slope;
      validate_chain(specs, ErrorKind::kCorruptModel);
    }
    layers.push_back(std::move(layer));
  }
  require(r.at_end(), ErrorKind::kCorruptModel, "trailing bytes after last layer");
  return AeModel(std::move(layers));
}

void save_model(const AeModel& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  write_model(model, out);
}

AeModel load_model(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorKind::kIo, "model file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  return read_model(in);
}

}  // namespace stainscope
