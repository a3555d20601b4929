#ifndef SYNTHTS_NN_TENSOR_HPP
#define SYNTHTS_NN_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

namespace synthts::nn {

// Dense row-major array. float for training, double for gradient checks.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, T fill = T(0))
      : shape(std::move(dims)), data(count(shape), fill) {}
  Tensor(std::vector<std::size_t> dims, std::vector<T> values) : shape(std::move(dims)), data(std::move(values)) {}

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t rank() const { return shape.size(); }

  static std::size_t count(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  }
};

// A value in the computation graph. Leaves are inputs (requires_grad false)
// or parameters (requires_grad true); interior nodes carry a closure that
// pushes this node's gradient into its parents.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void()> backward_fn;

  // Zero-filled gradient buffer shaped like value.
  Tensor<T>& grad_buffer() {
    if (grad.data.size() != value.data.size()) grad = Tensor<T>(value.shape);
    return grad;
  }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

}  // namespace synthts::nn

#endif  // SYNTHTS_NN_TENSOR_HPP
