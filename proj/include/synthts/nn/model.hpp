#ifndef SYNTHTS_NN_MODEL_HPP
#define SYNTHTS_NN_MODEL_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthts/core/rng.hpp"
#include "synthts/nn/ops.hpp"

namespace synthts::nn {

enum class Architecture { MLP, AE, CNN, FCN, ConvLSTM, ResNet };

std::string to_string(Architecture a);
Architecture architecture_from_string(const std::string& name);
const std::vector<Architecture>& all_architectures();

// Fixed layer sizes. Defaults are the reference configuration; tests shrink
// them to keep gradient checks small.
struct ModelSizes {
  std::size_t mlp_width = 128;
  double dropout = 0.2;

  std::array<std::size_t, 2> cnn_filters{16, 32};
  std::size_t cnn_kernel = 7;
  std::size_t cnn_pool = 2;
  std::size_t cnn_dense = 64;

  std::array<std::size_t, 3> fcn_filters{64, 128, 64};
  std::array<std::size_t, 3> fcn_kernels{8, 5, 3};
  std::size_t resnet_blocks = 3;

  std::size_t lstm_filters = 32;
  std::size_t lstm_kernel = 7;
  std::size_t lstm_pool = 4;
  std::size_t lstm_units = 64;

  std::size_t ae_hidden = 256;
  std::size_t ae_code = 64;
  double ae_reconstruction_weight = 0.5;

  bool operator==(const ModelSizes&) const = default;
};

struct ModelSpec {
  Architecture architecture = Architecture::FCN;
  std::size_t channels = 1;
  std::size_t length = 0;
  std::size_t classes = 2;
  ModelSizes sizes;

  // Throws DataError naming the first layer whose input does not fit.
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

template <typename T>
class Network {
 public:
  struct Output {
    Var<T> logits;
    Var<T> reconstruction;  // AE only
  };

  struct State {
    std::vector<std::vector<T>> parameters;
    std::vector<NormStats<T>> norms;
  };

  Network(ModelSpec spec, std::uint64_t seed);
  // Copies would share parameter nodes.
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const ModelSpec& spec() const { return spec_; }

  // batch [B, C, L].
  Output forward(const Tensor<T>& batch, bool training, Rng& rng);

  // Training objective: cross-entropy, plus the weighted reconstruction
  // error for AE.
  Var<T> loss(const Tensor<T>& batch, std::span<const int> labels, bool training, Rng& rng);

  // Evaluation-mode class probabilities [B, K], processed in chunks.
  Tensor<T> predict_proba(const Tensor<T>& batch, std::size_t chunk = 256);

  std::vector<Var<T>>& parameters() { return params_; }
  const std::vector<Var<T>>& parameters() const { return params_; }
  const std::vector<std::string>& parameter_names() const { return names_; }
  std::size_t parameter_count() const;
  void zero_grad();

  State snapshot() const;
  void restore(const State& state);
  std::vector<NormStats<T>> norm_stats() const;
  void set_norm_stats(const std::vector<NormStats<T>>& stats);

 private:
  struct Dense {
    Var<T> w, b;
  };
  struct Conv {
    Var<T> w, b;
  };
  struct Norm {
    Var<T> gamma, beta;
    NormStats<T> stats;
  };
  struct Recurrent {
    Var<T> wx, wh, b;
  };

  Var<T> add_param(const std::string& name, std::vector<std::size_t> shape, double bound, Rng& rng);
  Dense make_dense(const std::string& name, std::size_t in, std::size_t out, double gain, Rng& rng);
  Conv make_conv(const std::string& name, std::size_t in, std::size_t out, std::size_t kernel, Rng& rng);
  Norm make_norm(const std::string& name, std::size_t channels);

  Var<T> conv_bn_relu(const Var<T>& x, std::size_t idx, bool training, bool activate);

  ModelSpec spec_;
  std::vector<Var<T>> params_;
  std::vector<std::string> names_;
  std::vector<Dense> dense_;
  std::vector<Conv> conv_;
  std::vector<Norm> norm_;
  std::optional<Recurrent> lstm_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace synthts::nn

#endif  // SYNTHTS_NN_MODEL_HPP
