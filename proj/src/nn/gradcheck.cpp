#include "synthts/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace synthts::nn {

GradCheckResult gradient_check(const std::function<Var<double>()>& loss_fn, const std::vector<Var<double>>& params,
                               const std::vector<std::string>& names, std::size_t per_tensor, std::uint64_t seed,
                               double eps) {
  for (const auto& p : params) p->grad = Tensor<double>();
  backward(loss_fn());
  std::vector<Tensor<double>> analytic;
  for (const auto& p : params) {
    analytic.push_back(p->grad.size() == p->value.size() ? p->grad : Tensor<double>(p->value.shape));
  }

  GradCheckResult result;
  Rng rng(seed);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& value = params[t]->value.data;
    std::vector<std::size_t> idx(value.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx.begin(), idx.end());
    idx.resize(std::min(per_tensor, idx.size()));
    for (std::size_t i : idx) {
      const double saved = value[i];
      value[i] = saved + eps;
      const double up = loss_fn()->value.data[0];
      value[i] = saved - eps;
      const double down = loss_fn()->value.data[0];
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[t].data[i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      ++result.checked;
      if (result.worst.empty() || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst = (t < names.size() ? names[t] : "param" + std::to_string(t)) + "[" + std::to_string(i) + "]";
      }
    }
  }
  for (const auto& p : params) p->grad = Tensor<double>();
  return result;
}

GradCheckResult gradient_check(Network<double>& model, const Tensor<double>& batch, std::span<const int> labels,
                               std::size_t per_tensor, std::uint64_t seed, double eps) {
  // Evaluate the loss without disturbing running statistics.
  const auto stats = model.norm_stats();
  auto fn = [&] {
    model.set_norm_stats(stats);
    Rng rng(derive_seed(seed, {0x6763}));
    return model.loss(batch, labels, true, rng);
  };
  auto result = gradient_check(fn, model.parameters(), model.parameter_names(), per_tensor, seed, eps);
  model.set_norm_stats(stats);
  return result;
}

}  // namespace synthts::nn
