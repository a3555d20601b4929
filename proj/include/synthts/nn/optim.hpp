#ifndef SYNTHTS_NN_OPTIM_HPP
#define SYNTHTS_NN_OPTIM_HPP

#include <cstddef>
#include <vector>

#include "synthts/nn/tensor.hpp"

namespace synthts::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam. Moments are kept in double regardless of T.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Var<T>> params, AdamConfig cfg = {});

  // Applies one update from the accumulated gradients; parameters without a
  // gradient buffer are treated as having zero gradient.
  void step();
  std::size_t steps() const { return t_; }

 private:
  std::vector<Var<T>> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace synthts::nn

#endif  // SYNTHTS_NN_OPTIM_HPP
