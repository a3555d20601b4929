#include "synthts/nn/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "synthts/core/error.hpp"

namespace synthts::nn {

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::MLP: return "MLP";
    case Architecture::AE: return "AE";
    case Architecture::CNN: return "CNN";
    case Architecture::FCN: return "FCN";
    case Architecture::ConvLSTM: return "ConvLSTM";
    case Architecture::ResNet: return "ResNet";
  }
  return "?";
}

Architecture architecture_from_string(const std::string& name) {
  for (Architecture a : all_architectures()) {
    std::string canon = to_string(a);
    if (std::equal(canon.begin(), canon.end(), name.begin(), name.end(),
                   [](char x, char y) { return std::tolower(x) == std::tolower(y); })) {
      return a;
    }
  }
  throw UsageError("unknown classifier '" + name + "' (expected MLP, AE, CNN, FCN, ConvLSTM or ResNet)");
}

const std::vector<Architecture>& all_architectures() {
  static const std::vector<Architecture> all{Architecture::MLP, Architecture::AE,       Architecture::CNN,
                                             Architecture::FCN, Architecture::ConvLSTM, Architecture::ResNet};
  return all;
}

void ModelSpec::validate() const {
  const std::string who = to_string(architecture);
  if (channels == 0 || length == 0) throw DataError(who + ": input shape must be non-empty");
  if (classes < 2) throw DataError(who + ": need at least 2 classes");
  switch (architecture) {
    case Architecture::MLP:
    case Architecture::AE:
      break;
    case Architecture::CNN: {
      const std::size_t after = length / sizes.cnn_pool / sizes.cnn_pool;
      if (sizes.cnn_pool == 0 || after == 0) {
        throw DataError("CNN: length " + std::to_string(length) + " does not survive two max-pool layers of size " +
                        std::to_string(sizes.cnn_pool));
      }
      break;
    }
    case Architecture::FCN:
    case Architecture::ResNet: {
      const std::size_t k = *std::max_element(sizes.fcn_kernels.begin(), sizes.fcn_kernels.end());
      if (length < k) {
        throw DataError(who + ": length " + std::to_string(length) + " is shorter than kernel " + std::to_string(k));
      }
      if (architecture == Architecture::ResNet && sizes.resnet_blocks == 0) throw DataError("ResNet: no blocks");
      break;
    }
    case Architecture::ConvLSTM:
      if (sizes.lstm_pool == 0 || length / sizes.lstm_pool == 0) {
        throw DataError("ConvLSTM: length " + std::to_string(length) + " is shorter than pool " +
                        std::to_string(sizes.lstm_pool));
      }
      break;
  }
}

template <typename T>
Var<T> Network<T>::add_param(const std::string& name, std::vector<std::size_t> shape, double bound, Rng& rng) {
  Tensor<T> t(std::move(shape));
  if (bound > 0.0) {
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(-bound, bound));
  }
  auto p = parameter(std::move(t));
  params_.push_back(p);
  names_.push_back(name);
  return p;
}

// gain 6 for layers feeding a rectifier, 3 otherwise.
template <typename T>
typename Network<T>::Dense Network<T>::make_dense(const std::string& name, std::size_t in, std::size_t out,
                                                  double gain, Rng& rng) {
  Dense d;
  d.w = add_param(name + ".weight", {out, in}, std::sqrt(gain / static_cast<double>(in)), rng);
  d.b = add_param(name + ".bias", {out}, 0.0, rng);
  return d;
}

template <typename T>
typename Network<T>::Conv Network<T>::make_conv(const std::string& name, std::size_t in, std::size_t out,
                                                std::size_t kernel, Rng& rng) {
  Conv c;
  c.w = add_param(name + ".weight", {out, in, kernel}, std::sqrt(6.0 / static_cast<double>(in * kernel)), rng);
  c.b = add_param(name + ".bias", {out}, 0.0, rng);
  return c;
}

template <typename T>
typename Network<T>::Norm Network<T>::make_norm(const std::string& name, std::size_t channels) {
  Norm n;
  Rng unused(0);
  n.gamma = add_param(name + ".gamma", {channels}, 0.0, unused);
  std::fill(n.gamma->value.data.begin(), n.gamma->value.data.end(), T(1));
  n.beta = add_param(name + ".beta", {channels}, 0.0, unused);
  n.stats.mean.assign(channels, T(0));
  n.stats.var.assign(channels, T(1));
  return n;
}

template <typename T>
Network<T>::Network(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  Rng rng(seed);
  const auto& s = spec_.sizes;
  const std::size_t C = spec_.channels, L = spec_.length, K = spec_.classes;
  switch (spec_.architecture) {
    case Architecture::MLP:
      dense_.push_back(make_dense("dense0", C * L, s.mlp_width, 6.0, rng));
      dense_.push_back(make_dense("dense1", s.mlp_width, s.mlp_width, 6.0, rng));
      dense_.push_back(make_dense("out", s.mlp_width, K, 3.0, rng));
      break;
    case Architecture::AE:
      dense_.push_back(make_dense("enc0", C * L, s.ae_hidden, 6.0, rng));
      dense_.push_back(make_dense("enc1", s.ae_hidden, s.ae_code, 6.0, rng));
      dense_.push_back(make_dense("out", s.ae_code, K, 3.0, rng));
      dense_.push_back(make_dense("dec0", s.ae_code, s.ae_hidden, 6.0, rng));
      dense_.push_back(make_dense("dec1", s.ae_hidden, C * L, 3.0, rng));
      break;
    case Architecture::CNN: {
      conv_.push_back(make_conv("conv0", C, s.cnn_filters[0], s.cnn_kernel, rng));
      conv_.push_back(make_conv("conv1", s.cnn_filters[0], s.cnn_filters[1], s.cnn_kernel, rng));
      const std::size_t flat = s.cnn_filters[1] * (L / s.cnn_pool / s.cnn_pool);
      dense_.push_back(make_dense("dense0", flat, s.cnn_dense, 6.0, rng));
      dense_.push_back(make_dense("out", s.cnn_dense, K, 3.0, rng));
      break;
    }
    case Architecture::FCN: {
      std::size_t in = C;
      for (std::size_t j = 0; j < 3; ++j) {
        conv_.push_back(make_conv("conv" + std::to_string(j), in, s.fcn_filters[j], s.fcn_kernels[j], rng));
        norm_.push_back(make_norm("norm" + std::to_string(j), s.fcn_filters[j]));
        in = s.fcn_filters[j];
      }
      dense_.push_back(make_dense("out", in, K, 3.0, rng));
      break;
    }
    case Architecture::ResNet: {
      std::size_t in = C;
      for (std::size_t b = 0; b < s.resnet_blocks; ++b) {
        for (std::size_t j = 0; j < 3; ++j) {
          const std::string tag = "block" + std::to_string(b) + ".conv" + std::to_string(j);
          conv_.push_back(make_conv(tag, in, s.fcn_filters[j], s.fcn_kernels[j], rng));
          norm_.push_back(make_norm(tag + ".norm", s.fcn_filters[j]));
          in = s.fcn_filters[j];
        }
      }
      // Projection shortcut for the first block when its input width differs.
      if (C != s.fcn_filters[2]) {
        conv_.push_back(make_conv("block0.shortcut", C, s.fcn_filters[2], 1, rng));
        norm_.push_back(make_norm("block0.shortcut.norm", s.fcn_filters[2]));
      }
      dense_.push_back(make_dense("out", in, K, 3.0, rng));
      break;
    }
    case Architecture::ConvLSTM: {
      conv_.push_back(make_conv("conv0", C, s.lstm_filters, s.lstm_kernel, rng));
      const std::size_t H = s.lstm_units;
      Recurrent r;
      r.wx = add_param("lstm.input", {4 * H, s.lstm_filters}, std::sqrt(3.0 / static_cast<double>(s.lstm_filters)), rng);
      r.wh = add_param("lstm.hidden", {4 * H, H}, std::sqrt(3.0 / static_cast<double>(H)), rng);
      r.b = add_param("lstm.bias", {4 * H}, 0.0, rng);
      std::fill(r.b->value.data.begin() + static_cast<std::ptrdiff_t>(H),
                r.b->value.data.begin() + static_cast<std::ptrdiff_t>(2 * H), T(1));
      lstm_ = r;
      dense_.push_back(make_dense("out", H, K, 3.0, rng));
      break;
    }
  }
}

template <typename T>
Var<T> Network<T>::conv_bn_relu(const Var<T>& x, std::size_t idx, bool training, bool activate) {
  auto y = conv1d(x, conv_[idx].w, conv_[idx].b);
  y = batch_norm(y, norm_[idx].gamma, norm_[idx].beta, norm_[idx].stats, training);
  return activate ? relu(y) : y;
}

template <typename T>
typename Network<T>::Output Network<T>::forward(const Tensor<T>& batch, bool training, Rng& rng) {
  if (batch.rank() != 3 || batch.dim(1) != spec_.channels || batch.dim(2) != spec_.length) {
    throw DataError(to_string(spec_.architecture) + ": expected input [B, " + std::to_string(spec_.channels) + ", " +
                    std::to_string(spec_.length) + "]");
  }
  const auto& s = spec_.sizes;
  const T rate = static_cast<T>(s.dropout);
  auto x = constant(batch);
  Output out;
  switch (spec_.architecture) {
    case Architecture::MLP: {
      auto h = flatten(x);
      h = dropout(relu(linear(h, dense_[0].w, dense_[0].b)), rate, rng, training);
      h = dropout(relu(linear(h, dense_[1].w, dense_[1].b)), rate, rng, training);
      out.logits = linear(h, dense_[2].w, dense_[2].b);
      break;
    }
    case Architecture::AE: {
      auto h = relu(linear(flatten(x), dense_[0].w, dense_[0].b));
      auto code = relu(linear(h, dense_[1].w, dense_[1].b));
      out.logits = linear(code, dense_[2].w, dense_[2].b);
      auto d = relu(linear(code, dense_[3].w, dense_[3].b));
      out.reconstruction = linear(d, dense_[4].w, dense_[4].b);
      break;
    }
    case Architecture::CNN: {
      auto h = max_pool1d(relu(conv1d(x, conv_[0].w, conv_[0].b)), s.cnn_pool);
      h = max_pool1d(relu(conv1d(h, conv_[1].w, conv_[1].b)), s.cnn_pool);
      h = relu(linear(flatten(h), dense_[0].w, dense_[0].b));
      out.logits = linear(h, dense_[1].w, dense_[1].b);
      break;
    }
    case Architecture::FCN: {
      auto h = x;
      for (std::size_t j = 0; j < 3; ++j) h = conv_bn_relu(h, j, training, true);
      out.logits = linear(global_avg_pool(h), dense_[0].w, dense_[0].b);
      break;
    }
    case Architecture::ResNet: {
      auto h = x;
      const std::size_t shortcut = 3 * s.resnet_blocks;
      for (std::size_t b = 0; b < s.resnet_blocks; ++b) {
        auto y = conv_bn_relu(h, 3 * b, training, true);
        y = conv_bn_relu(y, 3 * b + 1, training, true);
        y = conv_bn_relu(y, 3 * b + 2, training, false);
        auto skip = (b == 0 && conv_.size() > shortcut) ? conv_bn_relu(h, shortcut, training, false) : h;
        h = relu(add(y, skip));
      }
      out.logits = linear(global_avg_pool(h), dense_[0].w, dense_[0].b);
      break;
    }
    case Architecture::ConvLSTM: {
      auto h = max_pool1d(relu(conv1d(x, conv_[0].w, conv_[0].b)), s.lstm_pool);
      h = lstm_last(h, lstm_->wx, lstm_->wh, lstm_->b);
      out.logits = linear(h, dense_[0].w, dense_[0].b);
      break;
    }
  }
  return out;
}

template <typename T>
Var<T> Network<T>::loss(const Tensor<T>& batch, std::span<const int> labels, bool training, Rng& rng) {
  auto out = forward(batch, training, rng);
  auto l = softmax_cross_entropy(out.logits, labels);
  if (out.reconstruction) {
    const T w = static_cast<T>(spec_.sizes.ae_reconstruction_weight);
    l = add(l, scale(mse(out.reconstruction, batch), w));
  }
  return l;
}

template <typename T>
Tensor<T> Network<T>::predict_proba(const Tensor<T>& batch, std::size_t chunk) {
  const std::size_t n = batch.dim(0);
  const std::size_t per = batch.size() / std::max<std::size_t>(n, 1);
  const std::size_t K = spec_.classes;
  Tensor<T> probs({n, K});
  Rng unused(0);
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t m = std::min(chunk, n - start);
    Tensor<T> part({m, batch.dim(1), batch.dim(2)},
                   std::vector<T>(batch.data.begin() + static_cast<std::ptrdiff_t>(start * per),
                                  batch.data.begin() + static_cast<std::ptrdiff_t>((start + m) * per)));
    const auto p = softmax(forward(part, false, unused).logits->value);
    std::copy(p.data.begin(), p.data.end(), probs.data.begin() + static_cast<std::ptrdiff_t>(start * K));
  }
  return probs;
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto& p : params_) p->grad = Tensor<T>();
}

template <typename T>
typename Network<T>::State Network<T>::snapshot() const {
  State s;
  for (const auto& p : params_) s.parameters.push_back(p->value.data);
  for (const auto& n : norm_) s.norms.push_back(n.stats);
  return s;
}

template <typename T>
void Network<T>::restore(const State& state) {
  if (state.parameters.size() != params_.size() || state.norms.size() != norm_.size()) {
    throw DataError("model state does not match architecture " + to_string(spec_.architecture));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (state.parameters[i].size() != params_[i]->value.size()) {
      throw DataError("model state: parameter '" + names_[i] + "' has the wrong size");
    }
    params_[i]->value.data = state.parameters[i];
  }
  set_norm_stats(state.norms);
}

template <typename T>
std::vector<NormStats<T>> Network<T>::norm_stats() const {
  std::vector<NormStats<T>> out;
  for (const auto& n : norm_) out.push_back(n.stats);
  return out;
}

template <typename T>
void Network<T>::set_norm_stats(const std::vector<NormStats<T>>& stats) {
  if (stats.size() != norm_.size()) throw DataError("model state: wrong number of normalization layers");
  for (std::size_t i = 0; i < norm_.size(); ++i) {
    if (stats[i].mean.size() != norm_[i].stats.mean.size() || stats[i].var.size() != norm_[i].stats.var.size()) {
      throw DataError("model state: normalization layer " + std::to_string(i) + " has the wrong width");
    }
    norm_[i].stats = stats[i];
  }
}

template class Network<float>;
template class Network<double>;

}  // namespace synthts::nn
