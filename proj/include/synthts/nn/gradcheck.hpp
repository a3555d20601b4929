#ifndef SYNTHTS_NN_GRADCHECK_HPP
#define SYNTHTS_NN_GRADCHECK_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "synthts/nn/model.hpp"

namespace synthts::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "<parameter>[<index>]"
};

// Central finite differences against reverse-mode gradients on up to
// `per_tensor` seeded entries of each parameter tensor. The relative error
// of one entry is |a - n| / max(|a|, |n|, 1e-6). loss_fn must be
// deterministic.
GradCheckResult gradient_check(const std::function<Var<double>()>& loss_fn, const std::vector<Var<double>>& params,
                               const std::vector<std::string>& names, std::size_t per_tensor, std::uint64_t seed,
                               double eps = 1e-5);

// Whole-model check on a batch in training mode (dropout masks fixed by seed).
GradCheckResult gradient_check(Network<double>& model, const Tensor<double>& batch, std::span<const int> labels,
                               std::size_t per_tensor, std::uint64_t seed, double eps = 1e-5);

}  // namespace synthts::nn

#endif  // SYNTHTS_NN_GRADCHECK_HPP
