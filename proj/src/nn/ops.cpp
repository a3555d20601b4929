#include "synthts/nn/ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "synthts/core/error.hpp"

namespace synthts::nn {

namespace {

template <typename T>
using MatrixR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Map = Eigen::Map<MatrixR<T>>;
template <typename T>
using ConstMap = Eigen::Map<const MatrixR<T>>;

template <typename T>
ConstMap<T> as_matrix(const Tensor<T>& t, std::size_t rows, std::size_t cols) {
  return ConstMap<T>(t.data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename T>
Map<T> as_matrix(Tensor<T>& t, std::size_t rows, std::size_t cols) {
  return Map<T>(t.data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

std::string shape_text(const std::vector<std::size_t>& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? ", " : "") << s[i];
  os << ']';
  return os.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DataError(what);
}

template <typename T>
Var<T> make_node(Tensor<T> value, std::initializer_list<Var<T>> parents) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  for (const auto& p : parents) {
    node->requires_grad = node->requires_grad || p->requires_grad;
    node->parents.push_back(p);
  }
  return node;
}

// Lays out the receptive fields of x [B, C, L] as columns [C*K, B*L].
template <typename T>
MatrixR<T> im2col(const Tensor<T>& x, std::size_t kernel) {
  const std::size_t batch = x.dim(0), channels = x.dim(1), len = x.dim(2);
  const std::size_t pad = (kernel - 1) / 2;
  MatrixR<T> cols = MatrixR<T>::Zero(static_cast<Eigen::Index>(channels * kernel),
                                     static_cast<Eigen::Index>(batch * len));
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t k = 0; k < kernel; ++k) {
      T* row = cols.data() + (c * kernel + k) * batch * len;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* src = x.data.data() + (b * channels + c) * len;
        T* dst = row + b * len;
        for (std::size_t t = 0; t < len; ++t) {
          const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(pad);
          if (s >= 0 && s < static_cast<std::ptrdiff_t>(len)) dst[t] = src[s];
        }
      }
    }
  }
  return cols;
}

template <typename T>
void col2im_add(const MatrixR<T>& cols, std::size_t kernel, Tensor<T>& dx) {
  const std::size_t batch = dx.dim(0), channels = dx.dim(1), len = dx.dim(2);
  const std::size_t pad = (kernel - 1) / 2;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t k = 0; k < kernel; ++k) {
      const T* row = cols.data() + (c * kernel + k) * batch * len;
      for (std::size_t b = 0; b < batch; ++b) {
        T* dst = dx.data.data() + (b * channels + c) * len;
        const T* src = row + b * len;
        for (std::size_t t = 0; t < len; ++t) {
          const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(pad);
          if (s >= 0 && s < static_cast<std::ptrdiff_t>(len)) dst[s] += src[t];
        }
      }
    }
  }
}

template <typename T>
T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

}  // namespace

template <typename T>
Var<T> constant(Tensor<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  return node;
}

template <typename T>
Var<T> parameter(Tensor<T> value) {
  auto node = constant(std::move(value));
  node->requires_grad = true;
  return node;
}

template <typename T>
void backward(const Var<T>& root) {
  require(root->value.size() == 1, "backward: root must be a scalar");
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  // Iterative post-order DFS.
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{root.get(), 0}};
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad_buffer().data[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward_fn && node->grad.size() == node->value.size()) node->backward_fn();
  }
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  require(x->value.rank() == 2 && weight->value.rank() == 2 && x->value.dim(1) == weight->value.dim(1) &&
              bias->value.size() == weight->value.dim(0),
          "linear: shape mismatch, x " + shape_text(x->value.shape) + " weight " + shape_text(weight->value.shape));
  const std::size_t batch = x->value.dim(0), in = x->value.dim(1), out = weight->value.dim(0);
  Tensor<T> y({batch, out});
  auto ym = as_matrix(y, batch, out);
  ym.noalias() = as_matrix(x->value, batch, in) * as_matrix(weight->value, out, in).transpose();
  const Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bv(bias->value.data.data(),
                                                                  static_cast<Eigen::Index>(out));
  ym.rowwise() += bv;
  auto node = make_node(std::move(y), {x, weight, bias});
  Node<T>* self = node.get();
  Node<T>* px = x.get();
  Node<T>* pw = weight.get();
  Node<T>* pb = bias.get();
  node->backward_fn = [=] {
    const auto dy = as_matrix(std::as_const(self->grad), batch, out);
    if (px->requires_grad) as_matrix(px->grad_buffer(), batch, in).noalias() += dy * as_matrix(pw->value, out, in);
    if (pw->requires_grad) as_matrix(pw->grad_buffer(), out, in).noalias() += dy.transpose() * as_matrix(px->value, batch, in);
    if (pb->requires_grad) {
      auto& gb = pb->grad_buffer();
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < out; ++o) gb.data[o] += self->grad.data[b * out + o];
      }
    }
  };
  return node;
}

template <typename T>
Var<T> conv1d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  require(x->value.rank() == 3 && weight->value.rank() == 3 && x->value.dim(1) == weight->value.dim(1) &&
              bias->value.size() == weight->value.dim(0),
          "conv1d: shape mismatch, x " + shape_text(x->value.shape) + " weight " + shape_text(weight->value.shape));
  const std::size_t batch = x->value.dim(0), channels = x->value.dim(1), len = x->value.dim(2);
  const std::size_t filters = weight->value.dim(0), kernel = weight->value.dim(2);
  const std::size_t span = channels * kernel, cols_n = batch * len;

  const MatrixR<T> cols = im2col(x->value, kernel);
  MatrixR<T> out = as_matrix(weight->value, filters, span) * cols;
  Tensor<T> y({batch, filters, len});
  for (std::size_t f = 0; f < filters; ++f) {
    const T bf = bias->value.data[f];
    for (std::size_t b = 0; b < batch; ++b) {
      const T* src = out.data() + f * cols_n + b * len;
      T* dst = y.data.data() + (b * filters + f) * len;
      for (std::size_t t = 0; t < len; ++t) dst[t] = src[t] + bf;
    }
  }
  auto node = make_node(std::move(y), {x, weight, bias});
  Node<T>* self = node.get();
  Node<T>* px = x.get();
  Node<T>* pw = weight.get();
  Node<T>* pb = bias.get();
  node->backward_fn = [=] {
    MatrixR<T> dout(static_cast<Eigen::Index>(filters), static_cast<Eigen::Index>(cols_n));
    for (std::size_t f = 0; f < filters; ++f) {
      for (std::size_t b = 0; b < batch; ++b) {
        const T* src = self->grad.data.data() + (b * filters + f) * len;
        std::copy(src, src + len, dout.data() + f * cols_n + b * len);
      }
    }
    if (pb->requires_grad) {
      auto& gb = pb->grad_buffer();
      for (std::size_t f = 0; f < filters; ++f) gb.data[f] += dout.row(static_cast<Eigen::Index>(f)).sum();
    }
    if (pw->requires_grad) {
      // Columns are rebuilt here instead of cached to bound peak memory.
      const MatrixR<T> cols_b = im2col(px->value, kernel);
      as_matrix(pw->grad_buffer(), filters, span).noalias() += dout * cols_b.transpose();
    }
    if (px->requires_grad) {
      const MatrixR<T> dcols = as_matrix(pw->value, filters, span).transpose() * dout;
      col2im_add(dcols, kernel, px->grad_buffer());
    }
  };
  return node;
}

template <typename T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, NormStats<T>& running, bool training,
                  T momentum, T eps) {
  const auto& shape = x->value.shape;
  require((shape.size() == 2 || shape.size() == 3) && gamma->value.size() == shape[1] &&
              beta->value.size() == shape[1],
          "batch_norm: shape mismatch, x " + shape_text(shape));
  const std::size_t batch = shape[0], channels = shape[1], len = shape.size() == 3 ? shape[2] : 1;
  const std::size_t count = batch * len;
  if (running.mean.size() != channels) {
    running.mean.assign(channels, T(0));
    running.var.assign(channels, T(1));
  }
  std::vector<T> mean(channels), inv_std(channels);
  if (training) {
    require(count > 1, "batch_norm: training needs more than one value per channel");
    for (std::size_t c = 0; c < channels; ++c) {
      double s = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* row = x->value.data.data() + (b * channels + c) * len;
        for (std::size_t t = 0; t < len; ++t) s += row[t];
      }
      const double m = s / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* row = x->value.data.data() + (b * channels + c) * len;
        for (std::size_t t = 0; t < len; ++t) ss += (row[t] - m) * (row[t] - m);
      }
      const double var = ss / static_cast<double>(count);
      mean[c] = static_cast<T>(m);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
      const double unbiased = ss / static_cast<double>(count - 1);
      running.mean[c] = static_cast<T>((1.0 - momentum) * running.mean[c] + momentum * m);
      running.var[c] = static_cast<T>((1.0 - momentum) * running.var[c] + momentum * unbiased);
    }
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      mean[c] = running.mean[c];
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running.var[c]) + static_cast<double>(eps)));
    }
  }
  Tensor<T> xhat(shape);
  Tensor<T> y(shape);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t off = (b * channels + c) * len;
      for (std::size_t t = 0; t < len; ++t) {
        const T h = (x->value.data[off + t] - mean[c]) * inv_std[c];
        xhat.data[off + t] = h;
        y.data[off + t] = gamma->value.data[c] * h + beta->value.data[c];
      }
    }
  }
  auto node = make_node(std::move(y), {x, gamma, beta});
  Node<T>* self = node.get();
  Node<T>* px = x.get();
  Node<T>* pg = gamma.get();
  Node<T>* pbeta = beta.get();
  node->backward_fn = [=, xhat = std::move(xhat), inv_std = std::move(inv_std)] {
    const auto& dy = self->grad.data;
    std::vector<double> sum_dy(channels, 0.0), sum_dy_xhat(channels, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t off = (b * channels + c) * len;
        for (std::size_t t = 0; t < len; ++t) {
          sum_dy[c] += dy[off + t];
          sum_dy_xhat[c] += dy[off + t] * xhat.data[off + t];
        }
      }
    }
    if (pg->requires_grad) {
      auto& g = pg->grad_buffer();
      for (std::size_t c = 0; c < channels; ++c) g.data[c] += static_cast<T>(sum_dy_xhat[c]);
    }
    if (pbeta->requires_grad) {
      auto& g = pbeta->grad_buffer();
      for (std::size_t c = 0; c < channels; ++c) g.data[c] += static_cast<T>(sum_dy[c]);
    }
    if (px->requires_grad) {
      auto& dx = px->grad_buffer();
      const auto n = static_cast<double>(count);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < channels; ++c) {
          const std::size_t off = (b * channels + c) * len;
          const double g = pg->value.data[c];
          for (std::size_t t = 0; t < len; ++t) {
            double v;
            if (training) {
              v = g * inv_std[c] / n * (n * dy[off + t] - sum_dy[c] - xhat.data[off + t] * sum_dy_xhat[c]);
            } else {
              v = g * inv_std[c] * dy[off + t];
            }
            dx.data[off + t] += static_cast<T>(v);
          }
        }
      }
    }
  };
  return node;
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> y(x->value.shape);
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] = std::max(T(0), x->value.data[i]);
  auto node = make_node(std::move(y), {x});
  Node<T>* self = node.get();
  Node<T>* px = x.get();
  node->backward_fn = [=] {
    if (!px->requires_grad) return;
    auto& dx = px->grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      if (px->value.data[i] > T(0)) dx.data[i] += self->grad.data[i];
    }
  };
  return node;
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require(a->value.shape == b->value.shape,
          "add: shape mismatch " + shape_text(a->value.shape) + " vs " + shape_text(b->value.shape));
  Tensor<T> y(a->value.shape);
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] = a->value.data[i] + b->value.data[i];
  auto node = make_node(std::move(y), {a, b});
  Node<T>* self = node.get();
  Node<T>* pa = a.get();
  Node<T>* pb = b.get();
  node->backward_fn = [=] {
    for (Node<T>* p : {pa, pb}) {
      if (!p->requires_grad) continue;
      auto& d = p->grad_buffer();
      for (std::size_t i = 0; i < d.size(); ++i) d.data[i] += self->grad.data[i];
    }
  };
  return node;
}

template <typename T>
Var<T> scale(const Var<T>& x, T factor) {
  Tensor<T> y(x->value.shape);
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] = factor * x->value.data[i];
  auto node = make_node(std::move(y), {x});
  Node<T>* self = node.get();
  Node<T>* px = x.get();
  node->backward_fn = [=] {
    if (!px->requires_grad) return;
    auto& d = px->grad_buffer();
    for (std::size_t i = 0; i < d.size(); ++i) d.data[i] += factor * self->grad.data[i];
  };
  return node;
}

template <typename T>
Var<T> max_pool1d(const Var<T>& x, std::size_t pool) {
  require(x->value.rank() == 3 && pool >= 1 && x->value.dim(2) >= pool,
          "max_pool1d: input " + shape_text(x->value.shape) + " too short for pool " + std::to_string(pool));
  const std::size_t batch = x->value.dim(0), channels = x->value.dim(1), len = x->value.dim(2);
  const std::size_t out_len = len / pool;
  Tensor<T> y({batch, channels, out_len});
  std::vector<std::size_t> argmax(y.size());
  for (std::size_t r = 0; r < batch * channels; ++r) {
    const T* src = x->value.data.data() + r * len;
    for (std::size_t o = 0; o < out_len; ++o) {
      std::size_t best = o * pool;
      for (std::size_t k = 1; k < pool; ++k) {
        if (src[o * pool + k] > src[best]) best = o * pool + k;
      }
      y.data[r * out_len + o] = src[best];
      argmax[r * out_len + o] = r * len + best;
    }
  }
  auto node = make_node(std::move(y), {x});
  Node<T>* self = node.get();
  Node<T>* px = x.get();
  node->backward_fn = [=, argmax = std::move(argmax)] {
    if (!px->requires_grad) return;
    auto& dx = px->grad_buffer();
    for (std::size_t i = 0; i < argmax.size(); ++i) dx.data[argmax[i]] += self->grad.data[i];
  };
  return node;
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  require(x->value.rank() == 3, "global_avg_pool: expected [B, C, L], got " + shape_text(x->value.shape));
  const std::size_t batch = x->value.dim(0), channels = x->value.dim(1), len = x->value.dim(2);
  Tensor<T> y({batch, channels});
  for (std::size_t r = 0; r < batch * channels; ++r) {
    double s = 0.0;
    for (std::size_t t = 0; t < len; ++t) s += x->value.data[r * len + t];
    y.data[r] = static_cast<T>(s / static_cast<double>(len));
  }
  auto node = make_node(std::move(y), {x});
  Node<T>* self = node.get();
  Node<T>* px = x.get();
  node->backward_fn = [=] {
    if (!px->requires_grad) return;
    auto& dx = px->grad_buffer();
    const T inv = T(1) / static_cast<T>(len);
    for (std::size_t r = 0; r < batch * channels; ++r) {
      const T g = self->grad.data[r] * inv;
      for (std::size_t t = 0; t < len; ++t) dx.data[r * len + t] += g;
    }
  };
  return node;
}

template <typename T>
Var<T> flatten(const Var<T>& x) {
  const std::size_t batch = x->value.dim(0);
  Tensor<T> y({batch, x->value.size() / batch}, x->value.data);
  auto node = make_node(std::move(y), {x});
  Node<T>* self = node.get();
  Node<T>* px = x.get();
  node->backward_fn = [=] {
    if (!px->requires_grad) return;
    auto& dx = px->grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += self->grad.data[i];
  };
  return node;
}

template <typename T>
Var<T> dropout(const Var<T>& x, T rate, Rng& rng, bool training) {
  if (!training || rate <= T(0)) return x;
  require(rate < T(1), "dropout: rate must be < 1");
  const T keep_scale = T(1) / (T(1) - rate);
  std::vector<T> mask(x->value.size());
  Tensor<T> y(x->value.shape);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng.uniform() < static_cast<double>(rate) ? T(0) : keep_scale;
    y.data[i] = x->value.data[i] * mask[i];
  }
  auto node = make_node(std::move(y), {x});
  Node<T>* self = node.get();
  Node<T>* px = x.get();
  node->backward_fn = [=, mask = std::move(mask)] {
    if (!px->requires_grad) return;
    auto& dx = px->grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += self->grad.data[i] * mask[i];
  };
  return node;
}

template <typename T>
Var<T> lstm_last(const Var<T>& x, const Var<T>& w_input, const Var<T>& w_hidden, const Var<T>& bias) {
  require(x->value.rank() == 3, "lstm: expected [B, C, S] input, got " + shape_text(x->value.shape));
  const std::size_t batch = x->value.dim(0), channels = x->value.dim(1), steps = x->value.dim(2);
  const std::size_t units = w_hidden->value.dim(1);
  const std::size_t gates = 4 * units;
  require(w_input->value.dim(0) == gates && w_input->value.dim(1) == channels && w_hidden->value.dim(0) == gates &&
              bias->value.size() == gates,
          "lstm: weight shapes do not match input " + shape_text(x->value.shape));

  // Time-major copy of the input: row (s * B + b) holds x[b, :, s].
  MatrixR<T> xs(static_cast<Eigen::Index>(steps * batch), static_cast<Eigen::Index>(channels));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      const T* src = x->value.data.data() + (b * channels + c) * steps;
      for (std::size_t s = 0; s < steps; ++s) xs(static_cast<Eigen::Index>(s * batch + b), static_cast<Eigen::Index>(c)) = src[s];
    }
  }
  const auto wx = as_matrix(w_input->value, gates, channels);
  const auto wh = as_matrix(w_hidden->value, gates, units);
  const Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bv(bias->value.data.data(),
                                                                  static_cast<Eigen::Index>(gates));
  MatrixR<T> pre = xs * wx.transpose();
  pre.rowwise() += bv;

  // Activated gates per step and cell/hidden states (index 0 = initial zero).
  std::vector<MatrixR<T>> act(steps);
  std::vector<MatrixR<T>> cell(steps + 1, MatrixR<T>::Zero(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(units)));
  std::vector<MatrixR<T>> hidden(steps + 1, MatrixR<T>::Zero(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(units)));
  const auto B = static_cast<Eigen::Index>(batch);
  const auto H = static_cast<Eigen::Index>(units);
  for (std::size_t s = 0; s < steps; ++s) {
    MatrixR<T> z = pre.middleRows(static_cast<Eigen::Index>(s * batch), B);
    z.noalias() += hidden[s] * wh.transpose();
    for (Eigen::Index b = 0; b < B; ++b) {
      for (Eigen::Index h = 0; h < H; ++h) {
        z(b, h) = sigmoid(z(b, h));
        z(b, H + h) = sigmoid(z(b, H + h));
        z(b, 2 * H + h) = std::tanh(z(b, 2 * H + h));
        z(b, 3 * H + h) = sigmoid(z(b, 3 * H + h));
        cell[s + 1](b, h) = z(b, H + h) * cell[s](b, h) + z(b, h) * z(b, 2 * H + h);
        hidden[s + 1](b, h) = z(b, 3 * H + h) * std::tanh(cell[s + 1](b, h));
      }
    }
    act[s] = std::move(z);
  }
  Tensor<T> y({batch, units});
  std::copy(hidden[steps].data(), hidden[steps].data() + batch * units, y.data.begin());

  auto node = make_node(std::move(y), {x, w_input, w_hidden, bias});
  Node<T>* self = node.get();
  Node<T>* px = x.get();
  Node<T>* pwx = w_input.get();
  Node<T>* pwh = w_hidden.get();
  Node<T>* pb = bias.get();
  node->backward_fn = [=, xs = std::move(xs), act = std::move(act), cell = std::move(cell),
                       hidden = std::move(hidden)] {
    const auto wx_b = as_matrix(pwx->value, gates, channels);
    const auto wh_b = as_matrix(pwh->value, gates, units);
    MatrixR<T> dh = as_matrix(std::as_const(self->grad), batch, units);
    MatrixR<T> dc = MatrixR<T>::Zero(B, H);
    MatrixR<T> dz_all(static_cast<Eigen::Index>(steps * batch), static_cast<Eigen::Index>(gates));
    MatrixR<T> dwh = MatrixR<T>::Zero(static_cast<Eigen::Index>(gates), H);
    for (std::size_t s = steps; s-- > 0;) {
      const auto& a = act[s];
      auto dz = dz_all.middleRows(static_cast<Eigen::Index>(s * batch), B);
      for (Eigen::Index b = 0; b < B; ++b) {
        for (Eigen::Index h = 0; h < H; ++h) {
          const T i = a(b, h), f = a(b, H + h), g = a(b, 2 * H + h), o = a(b, 3 * H + h);
          const T tc = std::tanh(cell[s + 1](b, h));
          const T dcell = dc(b, h) + dh(b, h) * o * (T(1) - tc * tc);
          dz(b, h) = dcell * g * i * (T(1) - i);
          dz(b, H + h) = dcell * cell[s](b, h) * f * (T(1) - f);
          dz(b, 2 * H + h) = dcell * i * (T(1) - g * g);
          dz(b, 3 * H + h) = dh(b, h) * tc * o * (T(1) - o);
          dc(b, h) = dcell * f;
        }
      }
      dwh.noalias() += dz.transpose() * hidden[s];
      dh.noalias() = dz * wh_b;
    }
    if (pwx->requires_grad) as_matrix(pwx->grad_buffer(), gates, channels).noalias() += dz_all.transpose() * xs;
    if (pwh->requires_grad) as_matrix(pwh->grad_buffer(), gates, units) += dwh;
    if (pb->requires_grad) {
      auto& gb = pb->grad_buffer();
      for (Eigen::Index r = 0; r < dz_all.rows(); ++r) {
        for (std::size_t k = 0; k < gates; ++k) gb.data[k] += dz_all(r, static_cast<Eigen::Index>(k));
      }
    }
    if (px->requires_grad) {
      const MatrixR<T> dxs = dz_all * wx_b;
      auto& dx = px->grad_buffer();
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < channels; ++c) {
          T* dst = dx.data.data() + (b * channels + c) * steps;
          for (std::size_t s = 0; s < steps; ++s) dst[s] += dxs(static_cast<Eigen::Index>(s * batch + b), static_cast<Eigen::Index>(c));
        }
      }
    }
  };
  return node;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  Tensor<T> p(logits.shape);
  for (std::size_t b = 0; b < batch; ++b) {
    const T* z = logits.data.data() + b * k;
    const T m = *std::max_element(z, z + k);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(static_cast<double>(z[j] - m));
    for (std::size_t j = 0; j < k; ++j) p.data[b * k + j] = static_cast<T>(std::exp(static_cast<double>(z[j] - m)) / s);
  }
  return p;
}

template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, std::span<const int> labels) {
  require(logits->value.rank() == 2 && logits->value.dim(0) == labels.size(),
          "cross-entropy: logits " + shape_text(logits->value.shape) + " vs " + std::to_string(labels.size()) +
              " labels");
  const std::size_t batch = logits->value.dim(0), k = logits->value.dim(1);
  Tensor<T> probs = softmax(logits->value);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int y = labels[b];
    require(y >= 0 && static_cast<std::size_t>(y) < k, "cross-entropy: label out of range");
    // log-softmax directly from the logits for stability.
    const T* z = logits->value.data.data() + b * k;
    const double m = *std::max_element(z, z + k);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(static_cast<double>(z[j]) - m);
    loss -= static_cast<double>(z[y]) - m - std::log(s);
  }
  Tensor<T> out({1}, static_cast<T>(loss / static_cast<double>(batch)));
  auto node = make_node(std::move(out), {logits});
  Node<T>* self = node.get();
  Node<T>* pz = logits.get();
  std::vector<int> ys(labels.begin(), labels.end());
  node->backward_fn = [=, probs = std::move(probs), ys = std::move(ys)] {
    if (!pz->requires_grad) return;
    auto& dz = pz->grad_buffer();
    const T g = self->grad.data[0] / static_cast<T>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < k; ++j) {
        const T target = static_cast<int>(j) == ys[b] ? T(1) : T(0);
        dz.data[b * k + j] += g * (probs.data[b * k + j] - target);
      }
    }
  };
  return node;
}

template <typename T>
Var<T> mse(const Var<T>& prediction, const Tensor<T>& target) {
  require(prediction->value.size() == target.size(), "mse: size mismatch");
  const std::size_t n = target.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(prediction->value.data[i]) - static_cast<double>(target.data[i]);
    s += d * d;
  }
  Tensor<T> out({1}, static_cast<T>(s / static_cast<double>(n)));
  auto node = make_node(std::move(out), {prediction});
  Node<T>* self = node.get();
  Node<T>* pp = prediction.get();
  node->backward_fn = [=, target = target] {
    if (!pp->requires_grad) return;
    auto& d = pp->grad_buffer();
    const T g = T(2) * self->grad.data[0] / static_cast<T>(n);
    for (std::size_t i = 0; i < n; ++i) d.data[i] += g * (pp->value.data[i] - target.data[i]);
  };
  return node;
}

#define SYNTHTS_INSTANTIATE_OPS(T)                                                                              \
  template Var<T> constant<T>(Tensor<T>);                                                                       \
  template Var<T> parameter<T>(Tensor<T>);                                                                      \
  template void backward<T>(const Var<T>&);                                                                     \
  template Var<T> linear<T>(const Var<T>&, const Var<T>&, const Var<T>&);                                       \
  template Var<T> conv1d<T>(const Var<T>&, const Var<T>&, const Var<T>&);                                       \
  template Var<T> batch_norm<T>(const Var<T>&, const Var<T>&, const Var<T>&, NormStats<T>&, bool, T, T);        \
  template Var<T> relu<T>(const Var<T>&);                                                                       \
  template Var<T> add<T>(const Var<T>&, const Var<T>&);                                                         \
  template Var<T> scale<T>(const Var<T>&, T);                                                                   \
  template Var<T> max_pool1d<T>(const Var<T>&, std::size_t);                                                    \
  template Var<T> global_avg_pool<T>(const Var<T>&);                                                            \
  template Var<T> flatten<T>(const Var<T>&);                                                                    \
  template Var<T> dropout<T>(const Var<T>&, T, Rng&, bool);                                                     \
  template Var<T> lstm_last<T>(const Var<T>&, const Var<T>&, const Var<T>&, const Var<T>&);                     \
  template Var<T> softmax_cross_entropy<T>(const Var<T>&, std::span<const int>);                                \
  template Var<T> mse<T>(const Var<T>&, const Tensor<T>&);                                                      \
  template Tensor<T> softmax<T>(const Tensor<T>&);

SYNTHTS_INSTANTIATE_OPS(float)
SYNTHTS_INSTANTIATE_OPS(double)

}  // namespace synthts::nn
